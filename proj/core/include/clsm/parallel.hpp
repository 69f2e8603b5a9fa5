#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace clsm {

// Runs f(i) for i in [begin, end) across `threads` workers. Work is claimed
// in fixed blocks whose boundaries do not depend on the thread count, and
// callers only perform disjoint writes, so any schedule produces output
// identical to the serial loop.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, std::size_t threads, F&& f) {
  const std::size_t count = end > begin ? end - begin : 0;
  if (threads <= 1 || count < 4096) {
    for (std::size_t i = begin; i < end; ++i) f(i);
    return;
  }
  constexpr std::size_t kBlock = 1024;
  std::atomic<std::size_t> next{begin};
  auto worker = [&] {
    while (true) {
      const std::size_t lo = next.fetch_add(kBlock);
      if (lo >= end) break;
      const std::size_t hi = lo + kBlock < end ? lo + kBlock : end;
      for (std::size_t i = lo; i < hi; ++i) f(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace clsm
