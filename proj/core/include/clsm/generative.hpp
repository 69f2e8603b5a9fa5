#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "clsm/behavior.hpp"
#include "clsm/graph.hpp"
#include "clsm/hyperparams.hpp"
#include "clsm/matrix.hpp"
#include "clsm/rng.hpp"

namespace clsm {

// Forward sampler settings. Dimensions come from `hyper`.
struct SimConfig {
  std::size_t num_nodes = 0;
  Hyperparams hyper;
  double selections_mean = 0.0;  // Poisson mean for per-node selection counts
  std::uint64_t seed = 0;
  // Keep an indicator in a node's reuse pool only when its pair produced a
  // link; the pool size then equals the node's degree.
  bool retain_link_indicators_only = true;
};

// Everything the sampler realized, for recovery evaluation.
struct GroundTruth {
  Matrix theta_true;                                      // N x K
  std::vector<double> beta_true;                          // K
  Matrix omega_true;                                      // K x V
  std::vector<std::vector<std::uint32_t>> indicator_topics;  // per node, pool topic values
};

struct Dataset {
  Graph graph;
  BehaviorData behaviors;
  GroundTruth truth;
};

// One membership vector drawn from Dirichlet(alpha).
std::vector<double> sample_membership(std::span<const double> alpha, Rng& rng);

struct NetworkSample {
  Graph graph;
  // Per node, topic values of the retained indicators, ordered by partner id
  // (the same order as Graph::neighbors when retention is link-only).
  std::vector<std::vector<std::uint32_t>> indicator_topics;
};

// Bernoulli links over all unordered pairs. Each pair draws one indicator per
// endpoint from that endpoint's membership; the link fires with rate
// beta[k] when both indicators agree on k and epsilon otherwise. Each pair
// uses its own RNG stream, so results are schedule-independent.
NetworkSample sample_network(const Matrix& thetas, std::span<const double> beta, double epsilon,
                             const Rng& root, bool retain_link_indicators_only = true);

// Tokens for each node: every selection picks one pooled indicator uniformly
// and draws a token from that topic's distribution. Nodes with an empty pool
// must have zero selections (DataError otherwise).
BehaviorData sample_behaviors(const std::vector<std::vector<std::uint32_t>>& indicator_topics,
                              const Matrix& omegas, std::span<const std::uint64_t> totals,
                              const Rng& root);

// Two triangular topic-token rows with peaks centered peak_gap apart around
// the vocabulary midpoint. gap = 0 gives identical rows; gap >= 2*width gives
// disjoint supports. Throws ConfigError if a peak falls outside the grid.
std::pair<std::vector<double>, std::vector<double>> make_overlap_topic_pair(
    std::size_t vocab_size, double peak_gap, double peak_width);

// Full forward pass: memberships, link rates, topic-token rows, link network,
// selection counts, tokens. Isolated nodes with selections get one fresh
// indicator drawn from their membership so their tokens remain defined; that
// patch indicator is not part of the recorded pool.
Dataset generate_dataset(const SimConfig& config);

// Controlled two-topic scenario: memberships from Dirichlet(alpha), fixed
// link rates, topic-token rows from make_overlap_topic_pair.
struct OverlapConfig {
  std::size_t num_nodes = 800;
  std::size_t vocab_size = 400;
  double peak_gap = 0.0;
  double peak_width = 60.0;
  std::vector<double> alpha{0.3, 0.3};
  double beta = 0.2;
  double epsilon = 1e-5;
  double selections_mean = 20.0;
  std::uint64_t seed = 0;
};

Dataset make_overlap_dataset(const OverlapConfig& config);

}  // namespace clsm
