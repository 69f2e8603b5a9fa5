#include "clsm/behavior.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "clsm/errors.hpp"

namespace clsm {

BehaviorData BehaviorData::from_triples(
    std::size_t num_nodes, std::size_t vocab_size,
    std::span<const std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples) {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> rows(triples.begin(),
                                                                            triples.end());
  for (const auto& [node, token, count] : rows) {
    if (node >= num_nodes) {
      throw DataError("behaviors: node id out of range: " + std::to_string(node));
    }
    if (token >= vocab_size) {
      throw DataError("behaviors: token out of range: " + std::to_string(token));
    }
    if (count == 0) {
      throw DataError("behaviors: zero count for node " + std::to_string(node));
    }
  }
  std::sort(rows.begin(), rows.end());

  BehaviorData data;
  data.vocab_size_ = vocab_size;
  data.offsets_.assign(num_nodes + 1, 0);
  data.totals_.assign(num_nodes, 0);
  for (std::size_t i = 0; i < rows.size();) {
    const auto [node, token, count0] = rows[i];
    std::uint64_t count = 0;
    while (i < rows.size() && std::get<0>(rows[i]) == node && std::get<1>(rows[i]) == token) {
      count += std::get<2>(rows[i]);
      ++i;
    }
    if (count > std::numeric_limits<std::uint32_t>::max()) {
      throw DataError("behaviors: summed count overflows for node " + std::to_string(node));
    }
    data.entries_.push_back({token, static_cast<std::uint32_t>(count)});
    data.entry_node_.push_back(node);
    data.totals_[node] += count;
    ++data.offsets_[node + 1];
  }
  for (std::size_t n = 0; n < num_nodes; ++n) data.offsets_[n + 1] += data.offsets_[n];
  return data;
}

std::uint64_t BehaviorData::total_selections() const {
  std::uint64_t total = 0;
  for (std::uint64_t t : totals_) total += t;
  return total;
}

}  // namespace clsm
