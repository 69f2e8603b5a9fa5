#include "clsm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "clsm/errors.hpp"
#include "clsm/rng.hpp"

namespace clsm {

std::vector<std::uint32_t> FoldSplit::train_nodes(std::uint32_t fold) const {
  std::vector<std::uint32_t> out;
  out.reserve(fold_of.size());
  for (std::uint32_t n = 0; n < fold_of.size(); ++n) {
    if (fold_of[n] != fold) out.push_back(n);
  }
  return out;
}

std::vector<std::uint32_t> FoldSplit::test_nodes(std::uint32_t fold) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t n = 0; n < fold_of.size(); ++n) {
    if (fold_of[n] == fold) out.push_back(n);
  }
  return out;
}

FoldSplit kfold_split(std::uint32_t num_nodes, std::uint32_t k, std::uint64_t seed) {
  if (k == 0) throw ConfigError("kfold_split: k must be positive");
  if (num_nodes < k) throw ConfigError("kfold_split: fewer nodes than folds");
  std::vector<std::uint32_t> order(num_nodes);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng = Rng(seed).stream(streams::kFoldSplit, 0);
  for (std::uint32_t i = num_nodes; i > 1; --i) {
    const std::uint64_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  FoldSplit split;
  split.num_folds = k;
  split.fold_of.assign(num_nodes, 0);
  const std::uint32_t base = num_nodes / k;
  const std::uint32_t extra = num_nodes % k;
  std::size_t at = 0;
  for (std::uint32_t f = 0; f < k; ++f) {
    const std::uint32_t size = base + (f < extra ? 1 : 0);
    for (std::uint32_t i = 0; i < size; ++i) split.fold_of[order[at++]] = f;
  }
  return split;
}

RankedPrediction RankedPrediction::make(std::vector<std::uint32_t> candidates,
                                        std::vector<double> scores,
                                        std::vector<std::uint32_t> positives) {
  if (candidates.size() != scores.size()) {
    throw DataError("ranked prediction: candidate/score length mismatch");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw DataError("ranked prediction: non-finite score");
  }
  std::unordered_set<std::uint32_t> candidate_set(candidates.begin(), candidates.end());
  for (std::uint32_t p : positives) {
    if (!candidate_set.count(p)) throw DataError("ranked prediction: positive not a candidate");
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedPrediction out;
  out.candidates.reserve(candidates.size());
  out.scores.reserve(scores.size());
  for (std::size_t i : order) {
    out.candidates.push_back(candidates[i]);
    out.scores.push_back(scores[i]);
  }
  out.positives = std::move(positives);
  return out;
}

double predict_link_prob(std::span<const double> theta_a, std::span<const double> theta_b,
                         std::span<const double> beta_hat, double epsilon) {
  double matched = 0.0;
  double linked = 0.0;
  for (std::size_t k = 0; k < theta_a.size(); ++k) {
    const double m = theta_a[k] * theta_b[k];
    matched += m;
    linked += m * beta_hat[k];
  }
  return linked + (1.0 - matched) * epsilon;
}

std::vector<double> predict_attribute_dist(std::span<const double> theta,
                                           const Matrix& omega_hat) {
  std::vector<double> out(omega_hat.cols(), 0.0);
  for (std::size_t k = 0; k < omega_hat.rows(); ++k) {
    const auto row = omega_hat.row(k);
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += theta[k] * row[v];
  }
  return out;
}

double average_rank_score(const RankedPrediction& prediction) {
  if (prediction.positives.empty()) {
    throw DataError("average_rank_score: no positives");
  }
  std::unordered_set<std::uint32_t> positive_set(prediction.positives.begin(),
                                                 prediction.positives.end());
  double rank_sum = 0.0;
  std::size_t hits = 0;
  const std::size_t n = prediction.candidates.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && prediction.scores[j] == prediction.scores[i]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based tie-group mean
    for (std::size_t t = i; t < j; ++t) {
      if (positive_set.count(prediction.candidates[t])) {
        rank_sum += mean_rank;
        ++hits;
      }
    }
    i = j;
  }
  return rank_sum / static_cast<double>(hits);
}

double auc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw DataError("auc: both score lists must be nonempty");
  }
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(positive_scores.size() + negative_scores.size());
  for (double s : positive_scores) items.push_back({s, true});
  for (double s : negative_scores) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (items[t].positive) positive_rank_sum += mean_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(positive_scores.size());
  const double nn = static_cast<double>(negative_scores.size());
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

double topic_recovery_mae(const Matrix& theta_true, const Matrix& theta_hat) {
  if (theta_true.rows() != theta_hat.rows() || theta_true.cols() != theta_hat.cols()) {
    throw DataError("topic_recovery_mae: shape mismatch");
  }
  const std::size_t n = theta_true.rows();
  const std::size_t k = theta_true.cols();
  if (n == 0 || k == 0) throw DataError("topic_recovery_mae: empty input");

  // cost(a, b): total absolute error if true column a is matched to column b.
  Matrix cost(k, k);
  cost.fill(0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto t = theta_true.row(r);
    const auto h = theta_hat.row(r);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) cost(a, b) += std::abs(t[a] - h[b]);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  if (k <= 8) {
    std::vector<std::size_t> sigma(k);
    std::iota(sigma.begin(), sigma.end(), std::size_t{0});
    do {
      double total = 0.0;
      for (std::size_t a = 0; a < k; ++a) total += cost(a, sigma[a]);
      best = std::min(best, total);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  } else {
    std::vector<bool> row_used(k, false);
    std::vector<bool> col_used(k, false);
    best = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
      double min_cost = std::numeric_limits<double>::infinity();
      std::size_t best_a = 0;
      std::size_t best_b = 0;
      for (std::size_t a = 0; a < k; ++a) {
        if (row_used[a]) continue;
        for (std::size_t b = 0; b < k; ++b) {
          if (col_used[b]) continue;
          if (cost(a, b) < min_cost) {
            min_cost = cost(a, b);
            best_a = a;
            best_b = b;
          }
        }
      }
      row_used[best_a] = true;
      col_used[best_b] = true;
      best += min_cost;
    }
  }
  return best / static_cast<double>(n * k);
}

InducedSubset induce_subset(const Graph& graph, const BehaviorData& behaviors,
                            std::span<const std::uint32_t> nodes) {
  InducedSubset out;
  out.nodes.assign(nodes.begin(), nodes.end());
  std::sort(out.nodes.begin(), out.nodes.end());
  if (std::adjacent_find(out.nodes.begin(), out.nodes.end()) != out.nodes.end()) {
    throw DataError("induce_subset: duplicate node id");
  }
  if (!out.nodes.empty() && out.nodes.back() >= graph.num_nodes()) {
    throw DataError("induce_subset: node id out of range");
  }
  constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> new_id(graph.num_nodes(), kAbsent);
  for (std::uint32_t i = 0; i < out.nodes.size(); ++i) new_id[out.nodes[i]] = i;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : graph.edges()) {
    if (new_id[e.a] != kAbsent && new_id[e.b] != kAbsent) {
      pairs.emplace_back(new_id[e.a], new_id[e.b]);
    }
  }
  out.graph = Graph::from_pairs(out.nodes.size(), pairs);

  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples;
  for (std::uint32_t i = 0; i < out.nodes.size(); ++i) {
    for (const auto& entry : behaviors.entries(out.nodes[i])) {
      triples.emplace_back(i, entry.token, entry.count);
    }
  }
  out.behaviors = BehaviorData::from_triples(out.nodes.size(), behaviors.vocab_size(), triples);
  return out;
}

namespace {

// Per-test-node metric pair; absent when the node was skipped.
struct NodeMetrics {
  bool usable = false;
  double auc_value = 0.0;
  double avg_rank = 0.0;
};

struct FoldJob {
  std::uint32_t num_topics;
  std::uint32_t fold;
  std::uint32_t repeat;
};

// Shared CV skeleton; `score_node` computes one test node's metrics given the
// fitted fold. Emits mean AUC and mean average-rank rows per (K, fold,
// repeat) and counts skipped nodes.
template <typename ScoreNode>
CvResult run_cv(const Graph& graph, const BehaviorData& behaviors, const FitConfig& base_config,
                const CvOptions& options, const std::string& task, ScoreNode&& score_node) {
  if (options.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (options.repeats == 0) throw ConfigError("cross-validation needs at least 1 repeat");
  if (options.k_grid.empty()) throw ConfigError("cross-validation needs a nonempty K grid");
  const Rng root(options.seed);
  CvResult result;
  for (std::uint32_t repeat = 0; repeat < options.repeats; ++repeat) {
    Rng split_rng = root.stream(streams::kFoldSplit, repeat);
    const FoldSplit split =
        kfold_split(static_cast<std::uint32_t>(graph.num_nodes()), options.folds,
                    split_rng.next_u64());
    for (std::uint32_t k : options.k_grid) {
      for (std::uint32_t fold = 0; fold < options.folds; ++fold) {
        const auto train = split.train_nodes(fold);
        const auto test = split.test_nodes(fold);
        InducedSubset sub = induce_subset(graph, behaviors, train);

        FitConfig config = base_config;
        config.num_topics = k;
        Rng seed_rng = root.stream(
            streams::kFitSeed,
            (static_cast<std::uint64_t>(repeat) << 40) ^ (static_cast<std::uint64_t>(k) << 20) ^
                fold);
        config.seed = seed_rng.next_u64();

        const FitOutput fitted = fit(sub.graph, sub.behaviors, config);
        if (options.observer) {
          options.observer(FoldContext{k, fold, repeat, train, test, sub.graph, sub.behaviors,
                                       fitted.model});
        }

        constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> new_id(graph.num_nodes(), kAbsent);
        for (std::uint32_t i = 0; i < sub.nodes.size(); ++i) new_id[sub.nodes[i]] = i;

        double auc_sum = 0.0;
        double rank_sum = 0.0;
        std::size_t used = 0;
        for (std::uint32_t node : test) {
          const NodeMetrics m = score_node(node, sub, fitted, new_id);
          if (!m.usable) {
            ++result.skipped_nodes;
            continue;
          }
          auc_sum += m.auc_value;
          rank_sum += m.avg_rank;
          ++used;
        }
        const double denom = used > 0 ? static_cast<double>(used) : 1.0;
        result.rows.push_back({options.dataset_name, task, options.model_name, k, fold, repeat,
                               "auc", auc_sum / denom});
        result.rows.push_back({options.dataset_name, task, options.model_name, k, fold, repeat,
                               "avg_rank", rank_sum / denom});
      }
    }
  }
  return result;
}

}  // namespace

CvResult run_link_prediction_cv(const Graph& graph, const BehaviorData& behaviors,
                                const FitConfig& base_config, const CvOptions& options) {
  auto score_node = [&](std::uint32_t node, const InducedSubset& sub, const FitOutput& fitted,
                        const std::vector<std::uint32_t>& new_id) {
    NodeMetrics out;
    const std::vector<double> theta =
        fold_in_theta_from_attributes(fitted.model, behaviors.entries(node));
    const std::size_t train_count = sub.nodes.size();

    constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint8_t> is_positive(train_count, 0);
    std::size_t positives = 0;
    for (std::uint32_t partner : graph.neighbors(node)) {
      if (new_id[partner] != kAbsent) {
        is_positive[new_id[partner]] = 1;
        ++positives;
      }
    }
    if (positives == 0 || positives == train_count) return out;

    std::vector<std::uint32_t> candidates(train_count);
    std::iota(candidates.begin(), candidates.end(), 0u);
    std::vector<double> scores(train_count);
    std::vector<double> positive_scores;
    std::vector<double> negative_scores;
    std::vector<std::uint32_t> positive_ids;
    for (std::uint32_t t = 0; t < train_count; ++t) {
      scores[t] = predict_link_prob(theta, fitted.model.theta_hat.row(t),
                                    fitted.model.beta_hat, fitted.model.hyper.epsilon);
      if (is_positive[t]) {
        positive_scores.push_back(scores[t]);
        positive_ids.push_back(t);
      } else {
        negative_scores.push_back(scores[t]);
      }
    }
    out.auc_value = auc(positive_scores, negative_scores);
    out.avg_rank = average_rank_score(
        RankedPrediction::make(std::move(candidates), std::move(scores), std::move(positive_ids)));
    out.usable = true;
    return out;
  };
  return run_cv(graph, behaviors, base_config, options, "links", score_node);
}

CvResult run_attribute_prediction_cv(const Graph& graph, const BehaviorData& behaviors,
                                     const FitConfig& base_config, const CvOptions& options) {
  auto score_node = [&](std::uint32_t node, const InducedSubset& sub, const FitOutput& fitted,
                        const std::vector<std::uint32_t>& new_id) {
    NodeMetrics out;
    const auto true_entries = behaviors.entries(node);
    const std::size_t vocab = behaviors.vocab_size();
    if (true_entries.empty() || true_entries.size() == vocab) return out;
    (void)sub;

    constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> train_partners;
    for (std::uint32_t partner : graph.neighbors(node)) {
      if (new_id[partner] != kAbsent) train_partners.push_back(new_id[partner]);
    }
    const std::vector<double> theta =
        fold_in_theta_from_links(fitted.model, fitted.state, train_partners);
    const std::vector<double> scores = predict_attribute_dist(theta, fitted.model.omega_hat);

    std::vector<double> positive_scores;
    std::vector<double> negative_scores;
    std::vector<std::uint32_t> positive_ids;
    std::vector<std::uint8_t> is_positive(vocab, 0);
    for (const auto& entry : true_entries) is_positive[entry.token] = 1;
    for (std::uint32_t v = 0; v < vocab; ++v) {
      if (is_positive[v]) {
        positive_scores.push_back(scores[v]);
        positive_ids.push_back(v);
      } else {
        negative_scores.push_back(scores[v]);
      }
    }
    std::vector<std::uint32_t> candidates(vocab);
    std::iota(candidates.begin(), candidates.end(), 0u);
    out.auc_value = auc(positive_scores, negative_scores);
    std::vector<double> scores_copy = scores;
    out.avg_rank = average_rank_score(
        RankedPrediction::make(std::move(candidates), std::move(scores_copy),
                               std::move(positive_ids)));
    out.usable = true;
    return out;
  };
  return run_cv(graph, behaviors, base_config, options, "attrs", score_node);
}

}  // namespace clsm
