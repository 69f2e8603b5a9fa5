#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clsm/behavior.hpp"
#include "clsm/graph.hpp"
#include "clsm/inference.hpp"
#include "clsm/io.hpp"
#include "clsm/matrix.hpp"

namespace clsm {

// Node-level cross-validation partition. Folds are disjoint, cover [0, N),
// and differ in size by at most one.
struct FoldSplit {
  std::vector<std::uint32_t> fold_of;  // per node, fold index in [0, num_folds)
  std::uint32_t num_folds = 0;

  std::vector<std::uint32_t> train_nodes(std::uint32_t fold) const;
  std::vector<std::uint32_t> test_nodes(std::uint32_t fold) const;
};

// Uniform random partition, deterministic per seed. The first (num_nodes mod
// k) folds take the extra node. Throws ConfigError if k == 0 or num_nodes < k.
FoldSplit kfold_split(std::uint32_t num_nodes, std::uint32_t k, std::uint64_t seed);

// Candidates with finite scores, held in descending score order.
struct RankedPrediction {
  std::vector<std::uint32_t> candidates;   // ids, sorted by score descending
  std::vector<double> scores;              // aligned with candidates
  std::vector<std::uint32_t> positives;    // subset of candidates

  // Sorts by score descending (stable in the given order on ties). Throws
  // DataError on non-finite scores, mismatched lengths, or positives that are
  // not candidates.
  static RankedPrediction make(std::vector<std::uint32_t> candidates, std::vector<double> scores,
                               std::vector<std::uint32_t> positives);
};

// Marginal link probability between two nodes with the indicators summed out:
// sum_k theta_a[k] * theta_b[k] * beta_hat[k] + (1 - sum_k theta_a[k] *
// theta_b[k]) * epsilon.
double predict_link_prob(std::span<const double> theta_a, std::span<const double> theta_b,
                         std::span<const double> beta_hat, double epsilon);

// Token distribution for a node with membership theta: p(v) = sum_k theta[k]
// * omega_hat(k, v).
std::vector<double> predict_attribute_dist(std::span<const double> theta, const Matrix& omega_hat);

// Mean 1-based rank of the positives in descending score order; tied scores
// share the mean rank of their tie group. Lower is better. Throws DataError
// if there are no positives.
double average_rank_score(const RankedPrediction& prediction);

// Mann-Whitney statistic: fraction of (positive, negative) score pairs
// ordered correctly, ties counting one half. Throws DataError if either side
// is empty.
double auc(std::span<const double> positive_scores, std::span<const double> negative_scores);

// Mean absolute error between memberships after the best column relabeling
// of theta_hat: min over permutations sigma of mean |theta_true(n, k) -
// theta_hat(n, sigma(k))|. Exhaustive search for K <= 8, greedy cost-matrix
// assignment beyond. Throws DataError on shape mismatch.
double topic_recovery_mae(const Matrix& theta_true, const Matrix& theta_hat);

// Re-indexed restriction of a dataset to `nodes`: edges with both endpoints
// inside, behaviors of the kept nodes, vocabulary unchanged. Position in the
// sorted `nodes` array becomes the new id.
struct InducedSubset {
  Graph graph;
  BehaviorData behaviors;
  std::vector<std::uint32_t> nodes;  // original ids, ascending; index = new id
};
InducedSubset induce_subset(const Graph& graph, const BehaviorData& behaviors,
                            std::span<const std::uint32_t> nodes);

// Everything a fold run exposes to instrumentation, before scoring begins.
struct FoldContext {
  std::uint32_t num_topics = 0;
  std::uint32_t fold = 0;
  std::uint32_t repeat = 0;
  const std::vector<std::uint32_t>& train_nodes;  // original ids, ascending
  const std::vector<std::uint32_t>& test_nodes;
  const Graph& train_graph;            // re-indexed to train positions
  const BehaviorData& train_behaviors;
  const FittedModel& model;
};
using FoldObserver = std::function<void(const FoldContext&)>;

struct CvOptions {
  std::uint32_t folds = 5;
  std::uint32_t repeats = 1;
  std::vector<std::uint32_t> k_grid{5, 10, 15, 20, 25};
  std::uint64_t seed = 0;
  std::string dataset_name = "data";
  std::string model_name = "clsm";
  FoldObserver observer;  // optional, called once per fitted fold
};

struct CvResult {
  std::vector<MetricsRow> rows;     // metrics "auc" and "avg_rank" per (K, fold, repeat)
  std::uint64_t skipped_nodes = 0;  // test nodes with no usable positives or negatives
};

// Node-wise link prediction. Per fold: fit on the train-induced subgraph and
// train behaviors; each test node's membership is folded in from its own
// tokens, every (test, train) pair is scored, and that node's held-out links
// to train nodes are the positives. AUC and average rank are averaged over
// scorable test nodes; a node with no positive or no negative candidate
// counts as skipped. Links between two test nodes are never scored.
CvResult run_link_prediction_cv(const Graph& graph, const BehaviorData& behaviors,
                                const FitConfig& base_config, const CvOptions& options);

// Node-wise attribute prediction. Per fold: fit as above; each test node's
// membership is folded in from its links to train nodes, all V tokens are
// ranked, and the node's own tokens are the positives. Nodes with no tokens
// (or with every token) count as skipped.
CvResult run_attribute_prediction_cv(const Graph& graph, const BehaviorData& behaviors,
                                     const FitConfig& base_config, const CvOptions& options);

}  // namespace clsm
