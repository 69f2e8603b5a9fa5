#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace clsm {

// Counter-based generator built on the splitmix64 finalizer: output i of a
// stream is mix(key + i * golden). Substreams are derived by hashing a (tag,
// id) pair into the key, so every node / unordered pair / selection draws
// from its own stream and results do not depend on evaluation order. That is
// what makes sampling reproducible bit-for-bit under any parallel schedule.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent substream for item `id` under namespace `tag`.
  Rng stream(std::uint64_t tag, std::uint64_t id) const;

  std::uint64_t next_u64();
  double next_double();       // uniform in [0, 1)
  double next_double_open();  // uniform in (0, 1)
  std::uint64_t next_below(std::uint64_t n);  // uniform in [0, n)

  bool next_bernoulli(double p);
  double next_gaussian();
  double next_gamma(double shape);
  std::uint32_t next_poisson(double mean);
  // Index drawn from an unnormalized nonnegative weight vector.
  std::uint32_t next_categorical(std::span<const double> weights);
  std::vector<double> next_dirichlet(std::span<const double> alpha);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Stream namespaces used by the samplers and initializers.
namespace streams {
inline constexpr std::uint64_t kBeta = 1;
inline constexpr std::uint64_t kMembership = 2;
inline constexpr std::uint64_t kTopicWords = 3;
inline constexpr std::uint64_t kSelectionCount = 4;
inline constexpr std::uint64_t kPair = 5;
inline constexpr std::uint64_t kIsolatedPatch = 6;
inline constexpr std::uint64_t kSelection = 7;
inline constexpr std::uint64_t kInitGamma = 8;
inline constexpr std::uint64_t kInitPhi = 9;
inline constexpr std::uint64_t kInitRho = 10;
inline constexpr std::uint64_t kFoldSplit = 11;
inline constexpr std::uint64_t kFitSeed = 12;
inline constexpr std::uint64_t kRestart = 13;
}  // namespace streams

// Canonical linear index of the unordered pair (a, b), a < b < n.
inline std::uint64_t pair_index(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return a * (2 * n - a - 1) / 2 + (b - a - 1);
}

}  // namespace clsm
