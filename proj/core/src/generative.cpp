#include "clsm/generative.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "clsm/errors.hpp"

namespace clsm {

std::vector<double> sample_membership(std::span<const double> alpha, Rng& rng) {
  for (double a : alpha) {
    if (!(a > 0.0)) throw ConfigError("sample_membership: alpha entries must be positive");
  }
  return rng.next_dirichlet(alpha);
}

NetworkSample sample_network(const Matrix& thetas, std::span<const double> beta, double epsilon,
                             const Rng& root, bool retain_link_indicators_only) {
  const std::size_t n = thetas.rows();
  const std::size_t k = thetas.cols();
  if (beta.size() != k) throw ConfigError("sample_network: beta size must match topic count");
  for (double b : beta) {
    if (!(b >= 0.0) || !(b <= 1.0)) throw ConfigError("sample_network: beta outside [0, 1]");
  }
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0)) {
    throw ConfigError("sample_network: epsilon outside [0, 1]");
  }

  NetworkSample sample;
  sample.indicator_topics.resize(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> links;
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) {
      Rng pair_rng = root.stream(streams::kPair, pair_index(a, b, n));
      const std::uint32_t za = pair_rng.next_categorical(thetas.row(a));
      const std::uint32_t zb = pair_rng.next_categorical(thetas.row(b));
      const double rate = za == zb ? beta[za] : epsilon;
      const bool linked = pair_rng.next_bernoulli(rate);
      if (linked) links.emplace_back(a, b);
      if (linked || !retain_link_indicators_only) {
        sample.indicator_topics[a].push_back(za);
        sample.indicator_topics[b].push_back(zb);
      }
    }
  }
  sample.graph = Graph::from_pairs(n, links);
  return sample;
}

BehaviorData sample_behaviors(const std::vector<std::vector<std::uint32_t>>& indicator_topics,
                              const Matrix& omegas, std::span<const std::uint64_t> totals,
                              const Rng& root) {
  const std::size_t n = indicator_topics.size();
  if (totals.size() != n) {
    throw ConfigError("sample_behaviors: totals size must match node count");
  }
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples;
  for (std::uint32_t node = 0; node < n; ++node) {
    const auto& pool = indicator_topics[node];
    if (totals[node] > 0 && pool.empty()) {
      throw DataError("sample_behaviors: node " + std::to_string(node) +
                      " has selections but an empty indicator pool");
    }
    for (std::uint64_t m = 0; m < totals[node]; ++m) {
      Rng sel_rng = root.stream(streams::kSelection, (static_cast<std::uint64_t>(node) << 32) | m);
      const std::uint32_t pick = static_cast<std::uint32_t>(sel_rng.next_below(pool.size()));
      const std::uint32_t topic = pool[pick];
      const std::uint32_t token = sel_rng.next_categorical(omegas.row(topic));
      triples.emplace_back(node, token, 1);
    }
  }
  return BehaviorData::from_triples(n, omegas.cols(), triples);
}

std::pair<std::vector<double>, std::vector<double>> make_overlap_topic_pair(
    std::size_t vocab_size, double peak_gap, double peak_width) {
  if (!(peak_width > 0.0)) throw ConfigError("make_overlap_topic_pair: width must be positive");
  if (peak_gap < 0.0) throw ConfigError("make_overlap_topic_pair: gap must be nonnegative");
  const double mid = static_cast<double>(vocab_size) / 2.0;
  const double c1 = mid - peak_gap / 2.0;
  const double c2 = mid + peak_gap / 2.0;
  if (c1 - peak_width < -0.5 || c2 + peak_width > static_cast<double>(vocab_size) - 0.5) {
    throw ConfigError("make_overlap_topic_pair: peaks fall outside the vocabulary");
  }
  auto bump = [&](double center) {
    std::vector<double> row(vocab_size, 0.0);
    double total = 0.0;
    for (std::size_t v = 0; v < vocab_size; ++v) {
      const double w = 1.0 - std::abs(static_cast<double>(v) - center) / peak_width;
      if (w > 0.0) {
        row[v] = w;
        total += w;
      }
    }
    for (double& w : row) w /= total;
    return row;
  };
  return {bump(c1), bump(c2)};
}

Dataset generate_dataset(const SimConfig& config) {
  config.hyper.validate();
  if (config.num_nodes == 0) throw ConfigError("generate_dataset: need at least one node");
  if (!(config.selections_mean >= 0.0)) {
    throw ConfigError("generate_dataset: selections_mean must be nonnegative");
  }
  const std::size_t n = config.num_nodes;
  const std::size_t k = config.hyper.num_topics();
  const std::size_t v = config.hyper.vocab_size();
  const Rng root(config.seed);

  GroundTruth truth;
  truth.beta_true.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    Rng r = root.stream(streams::kBeta, i);
    const double x = r.next_gamma(config.hyper.eta.first);
    const double y = r.next_gamma(config.hyper.eta.second);
    truth.beta_true[i] = x / (x + y);
  }
  truth.theta_true = Matrix(n, k);
  for (std::uint32_t node = 0; node < n; ++node) {
    Rng r = root.stream(streams::kMembership, node);
    const auto theta = r.next_dirichlet(config.hyper.alpha);
    for (std::size_t i = 0; i < k; ++i) truth.theta_true(node, i) = theta[i];
  }
  truth.omega_true = Matrix(k, v);
  for (std::size_t i = 0; i < k; ++i) {
    Rng r = root.stream(streams::kTopicWords, i);
    const auto row = r.next_dirichlet(config.hyper.kappa);
    for (std::size_t j = 0; j < v; ++j) truth.omega_true(i, j) = row[j];
  }

  NetworkSample net = sample_network(truth.theta_true, truth.beta_true, config.hyper.epsilon,
                                     root, config.retain_link_indicators_only);
  truth.indicator_topics = net.indicator_topics;

  std::vector<std::uint64_t> totals(n, 0);
  for (std::uint32_t node = 0; node < n; ++node) {
    Rng r = root.stream(streams::kSelectionCount, node);
    totals[node] = r.next_poisson(config.selections_mean);
  }

  // A node can end up with selections but no retained indicators (no links).
  // Give it one fresh indicator from its own membership so its tokens are
  // still generated; the recorded pool keeps only link indicators.
  std::vector<std::vector<std::uint32_t>> pools = net.indicator_topics;
  for (std::uint32_t node = 0; node < n; ++node) {
    if (totals[node] > 0 && pools[node].empty()) {
      Rng r = root.stream(streams::kIsolatedPatch, node);
      pools[node].push_back(r.next_categorical(truth.theta_true.row(node)));
    }
  }

  Dataset dataset;
  dataset.behaviors = sample_behaviors(pools, truth.omega_true, totals, root);
  dataset.graph = std::move(net.graph);
  dataset.truth = std::move(truth);
  return dataset;
}

Dataset make_overlap_dataset(const OverlapConfig& config) {
  if (config.alpha.size() != 2) {
    throw ConfigError("make_overlap_dataset: alpha must have two entries");
  }
  const std::size_t n = config.num_nodes;
  const Rng root(config.seed);

  GroundTruth truth;
  truth.beta_true.assign(2, config.beta);
  truth.theta_true = Matrix(n, 2);
  for (std::uint32_t node = 0; node < n; ++node) {
    Rng r = root.stream(streams::kMembership, node);
    const auto theta = r.next_dirichlet(config.alpha);
    truth.theta_true(node, 0) = theta[0];
    truth.theta_true(node, 1) = theta[1];
  }
  const auto [row0, row1] =
      make_overlap_topic_pair(config.vocab_size, config.peak_gap, config.peak_width);
  truth.omega_true = Matrix(2, config.vocab_size);
  for (std::size_t j = 0; j < config.vocab_size; ++j) {
    truth.omega_true(0, j) = row0[j];
    truth.omega_true(1, j) = row1[j];
  }

  NetworkSample net =
      sample_network(truth.theta_true, truth.beta_true, config.epsilon, root, true);
  truth.indicator_topics = net.indicator_topics;

  std::vector<std::uint64_t> totals(n, 0);
  for (std::uint32_t node = 0; node < n; ++node) {
    Rng r = root.stream(streams::kSelectionCount, node);
    totals[node] = r.next_poisson(config.selections_mean);
  }
  std::vector<std::vector<std::uint32_t>> pools = net.indicator_topics;
  for (std::uint32_t node = 0; node < n; ++node) {
    if (totals[node] > 0 && pools[node].empty()) {
      Rng r = root.stream(streams::kIsolatedPatch, node);
      pools[node].push_back(r.next_categorical(truth.theta_true.row(node)));
    }
  }

  Dataset dataset;
  dataset.behaviors = sample_behaviors(pools, truth.omega_true, totals, root);
  dataset.graph = std::move(net.graph);
  dataset.truth = std::move(truth);
  return dataset;
}

}  // namespace clsm
