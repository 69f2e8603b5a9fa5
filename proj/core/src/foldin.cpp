#include <cmath>
#include <cstring>
#include <vector>

#include "clsm/errors.hpp"
#include "clsm/inference.hpp"
#include "clsm/math.hpp"

namespace clsm {
namespace {

constexpr double kFoldInTol = 1e-6;
constexpr std::size_t kFoldInMaxIters = 1000;

std::vector<double> prior_mean(const Hyperparams& hyper) {
  double total = 0.0;
  for (double a : hyper.alpha) total += a;
  std::vector<double> theta(hyper.alpha.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = hyper.alpha[i] / total;
  return theta;
}

std::vector<double> normalized(std::span<const double> gamma) {
  double total = 0.0;
  for (double g : gamma) total += g;
  std::vector<double> theta(gamma.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = gamma[i] / total;
  return theta;
}

// Fixed point over a fresh node's membership posterior: responsibilities for
// each observation against `log_evidence` rows, then a Dirichlet update.
// Rows of log_evidence hold, per observation, the K log weights that add to
// E[log theta_k]; `weights` are observation multiplicities.
std::vector<double> fold_in(const Hyperparams& hyper, const Matrix& log_evidence,
                            std::span<const double> weights) {
  const std::size_t k = hyper.num_topics();
  const std::size_t rows = log_evidence.rows();
  double total_weight = 0.0;
  for (double w : weights) total_weight += w;

  std::vector<double> gamma(k);
  for (std::size_t i = 0; i < k; ++i) {
    gamma[i] = hyper.alpha[i] + total_weight / static_cast<double>(k);
  }
  std::vector<double> elog(k);
  std::vector<double> logits(k);
  std::vector<double> resp(k);
  std::vector<double> next(k);
  for (std::size_t iter = 0; iter < kFoldInMaxIters; ++iter) {
    dirichlet_expect_log(gamma, elog);
    for (std::size_t i = 0; i < k; ++i) next[i] = hyper.alpha[i];
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = log_evidence.row(r);
      for (std::size_t i = 0; i < k; ++i) logits[i] = row[i] + elog[i];
      normalize_log_simplex(logits, resp);
      for (std::size_t i = 0; i < k; ++i) next[i] += weights[r] * resp[i];
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < k; ++i) delta = std::max(delta, std::abs(next[i] - gamma[i]));
    gamma.swap(next);
    if (delta < kFoldInTol) break;
  }
  return normalized(gamma);
}

}  // namespace

std::vector<double> fold_in_theta_from_attributes(const FittedModel& model,
                                                  std::span<const BehaviorData::Entry> entries) {
  if (entries.empty()) return prior_mean(model.hyper);
  const std::size_t k = model.hyper.num_topics();
  Matrix log_evidence(entries.size(), k);
  std::vector<double> weights(entries.size());
  for (std::size_t r = 0; r < entries.size(); ++r) {
    if (entries[r].token >= model.omega_hat.cols()) {
      throw DataError("fold-in: token out of range");
    }
    for (std::size_t i = 0; i < k; ++i) {
      log_evidence(r, i) = std::log(model.omega_hat(i, entries[r].token));
    }
    weights[r] = static_cast<double>(entries[r].count);
  }
  return fold_in(model.hyper, log_evidence, weights);
}

std::vector<double> fold_in_theta_from_attributes(const FittedModel& model,
                                                  std::span<const std::uint32_t> tokens) {
  std::vector<BehaviorData::Entry> entries;
  entries.reserve(tokens.size());
  for (std::uint32_t t : tokens) entries.push_back({t, 1});
  return fold_in_theta_from_attributes(model, entries);
}

namespace {

std::vector<double> fold_in_links_impl(const FittedModel& model,
                                       std::span<const double> log_beta_terms,
                                       std::span<const std::uint32_t> neighbors) {
  if (neighbors.empty()) return prior_mean(model.hyper);
  const std::size_t k = model.hyper.num_topics();
  Matrix log_evidence(neighbors.size(), k);
  std::vector<double> weights(neighbors.size(), 1.0);
  for (std::size_t r = 0; r < neighbors.size(); ++r) {
    if (neighbors[r] >= model.theta_hat.rows()) {
      throw DataError("fold-in: neighbor id out of range");
    }
    for (std::size_t i = 0; i < k; ++i) {
      log_evidence(r, i) = std::log(model.theta_hat(neighbors[r], i)) + log_beta_terms[i];
    }
  }
  return fold_in(model.hyper, log_evidence, weights);
}

}  // namespace

std::vector<double> fold_in_theta_from_links(const FittedModel& model,
                                             const VariationalState& state,
                                             std::span<const std::uint32_t> neighbors) {
  const std::size_t k = model.hyper.num_topics();
  std::vector<double> elog_beta(k);
  for (std::size_t i = 0; i < k; ++i) {
    elog_beta[i] = beta_expect_logs(state.tau(i, 0), state.tau(i, 1)).first;
  }
  return fold_in_links_impl(model, elog_beta, neighbors);
}

std::vector<double> fold_in_theta_from_links(const FittedModel& model,
                                             std::span<const std::uint32_t> neighbors) {
  std::vector<double> log_beta(model.beta_hat.size());
  for (std::size_t i = 0; i < log_beta.size(); ++i) log_beta[i] = std::log(model.beta_hat[i]);
  return fold_in_links_impl(model, log_beta, neighbors);
}

}  // namespace clsm
