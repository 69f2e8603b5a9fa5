#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clsm/behavior.hpp"
#include "clsm/graph.hpp"
#include "clsm/hyperparams.hpp"
#include "clsm/matrix.hpp"
#include "clsm/state.hpp"

namespace clsm {

// Settings for one variational fit. Symmetric priors are expanded to full
// Hyperparams against the data's vocabulary at fit time.
struct FitConfig {
  enum class OmegaMode { kVariationalRho, kDirectWithSmoothing };

  std::size_t num_topics = 5;
  std::size_t max_iterations = 500;
  double rel_tol = 1e-8;          // stop when |delta objective / objective| falls below
  double alpha_precision = 1.0;   // alpha_k = precision / K
  std::pair<double, double> eta{1.0, 1.0};
  double kappa_value = 0.1;
  double epsilon = 1e-5;
  OmegaMode omega_mode = OmegaMode::kVariationalRho;
  double smoothing_pseudocount = 0.01;  // direct mode only
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  // Independent runs from different initializations; fit keeps the one with
  // the best final objective. The bound is multimodal, so one run can land
  // in a topic-merged optimum that restarts escape.
  std::size_t num_restarts = 1;
  // Relative amplitude of the random perturbation applied to the uniform
  // edge-responsibility init. Near-uniform starts sit close to the ridge
  // between basins; restarts after the first use a spread value so they
  // explore genuinely different basins.
  double init_jitter = 0.05;

  Hyperparams hyper(std::size_t vocab_size) const;
  void validate() const;
};

struct FitReport {
  std::vector<double> elbo_trace;  // objective before any sweep, then after each
  bool converged = false;
  std::uint64_t iterations = 0;  // sweeps performed
  double wall_time_per_iteration = 0.0;  // seconds
};

struct FitOutput {
  FittedModel model;
  FitReport report;
  VariationalState state;
};

// Additive pieces of the objective; total is their sum. Entropy fields hold
// -E[log q(.)] so every field enters with a plus sign.
struct ElboBreakdown {
  double link_lik = 0.0;
  double nonlink_lik = 0.0;
  double z_prior_links = 0.0;
  double z_prior_nonlinks = 0.0;
  double behavior_lik = 0.0;
  double c_prior = 0.0;
  double theta_prior = 0.0;
  double beta_prior = 0.0;
  double omega_prior = 0.0;
  double z_entropy = 0.0;
  double c_entropy = 0.0;
  double theta_entropy = 0.0;
  double beta_entropy = 0.0;
  double omega_entropy = 0.0;
  double total = 0.0;
};

// Evidence lower bound of the full variational posterior at `state`.
// Validates the state first and throws StateError on violations.
double compute_elbo(const VariationalState& state, const Graph& graph,
                    const BehaviorData& behaviors, const Hyperparams& hyper);
ElboBreakdown compute_elbo_breakdown(const VariationalState& state, const Graph& graph,
                                     const BehaviorData& behaviors, const Hyperparams& hyper);

// Sum over non-link pairs of phi_bar products, one value per topic, computed
// from per-node aggregates in O(N K + E K).
std::vector<double> nonlink_pair_products(const Matrix& phi_bar, const Graph& graph);

namespace detail {
// Shared objective evaluator. With log_omega_override null it yields the
// variational bound; otherwise the behavior terms read the pointed-to log
// point estimate, the topic-token prior and entropy drop out, and the
// smoothing regularizer smoothing_delta * sum(log omega) is added.
double objective_impl(const VariationalState& state, const Graph& graph,
                      const BehaviorData& behaviors, const Hyperparams& hyper,
                      const Matrix* log_omega_override, double smoothing_delta,
                      ElboBreakdown* breakdown);
}  // namespace detail

// Coordinate ascent on the variational objective. One sweep updates, in
// order: all edge weights, all selection weights, all membership posteriors,
// the non-link stand-ins, the link-rate posterior, and the topic-token
// parameters. Each global phase reads a consistent snapshot, so parallel
// execution reproduces the serial result bit for bit.
class CoordinateAscent {
 public:
  CoordinateAscent(const Graph& graph, const BehaviorData& behaviors, FitConfig config);

  VariationalState make_initial_state() const;
  void set_state(VariationalState state);
  const VariationalState& state() const { return state_; }
  const Hyperparams& hyper() const { return hyper_; }

  // Recomputes the expectation caches the update rules read. set_state
  // already does this; exposed for callers that mutate state in place.
  void refresh_expectations();

  // Single-coordinate update rules, exposed for testing. Each returns the
  // new value given the current state and caches, without mutating. All
  // require a state (set_state first); so does objective.
  std::vector<double> edge_phi_update(std::size_t edge_id) const;
  std::vector<double> lambda_row_update(std::size_t entry_id) const;
  std::vector<double> gamma_update(std::uint32_t node) const;
  // Exact maximizer of the bound in node n's non-link stand-in given all
  // other parameters: softmax over k of E[log theta_{n,k}] + (E[log(1 -
  // beta_k)] - log(1 - epsilon)) * R_{n,k} / W_n, where W_n = N - 1 -
  // degree(n) and R_{n,k} sums the stand-ins of n's non-partners. Averaging
  // the incident edge weights instead loses hundreds of nats per sweep and
  // breaks the monotone-trace guarantee, so the exact step is used.
  std::vector<double> phi_bar_update(std::uint32_t node) const;
  Matrix tau_update() const;
  Matrix rho_update() const;
  Matrix omega_direct_update() const;

  void sweep();
  // Objective the run tracks: the ELBO, or in direct mode the EM surrogate
  // with the smoothing regularizer.
  double objective() const;

  FitOutput run();

 private:
  void require_state() const;
  void edge_phi_update(std::size_t edge_id, std::span<double> out) const;
  void lambda_row_update(std::size_t entry_id, std::span<double> out) const;
  void gamma_update(std::uint32_t node, std::span<double> out) const;
  void phi_bar_update(std::uint32_t node, std::span<double> out,
                      std::span<const double> col_sums) const;
  void refresh_elog_theta();
  void refresh_elog_beta();
  void refresh_elog_omega();
  FittedModel extract_model() const;

  const Graph& graph_;
  const BehaviorData& behaviors_;
  FitConfig cfg_;
  Hyperparams hyper_;
  VariationalState state_;
  Matrix elog_theta_;               // N x K
  std::vector<double> elog_beta_;   // K
  std::vector<double> elog_beta_c_; // K, E[log(1 - beta)]
  Matrix elog_omega_;               // K x V; log point estimate in direct mode
  Matrix omega_hat_;                // direct mode point estimate
};

VariationalState init_state(const Graph& graph, const BehaviorData& behaviors,
                            const FitConfig& config);
FitOutput fit(const Graph& graph, const BehaviorData& behaviors, const FitConfig& config);
FitOutput fit_from_state(const Graph& graph, const BehaviorData& behaviors,
                         const FitConfig& config, VariationalState initial);

// Membership estimate for a held-out node from its tokens alone, via fixed
// point iteration against the fitted topic-token estimates. Empty input
// returns the prior mean.
std::vector<double> fold_in_theta_from_attributes(const FittedModel& model,
                                                  std::span<const BehaviorData::Entry> entries);
std::vector<double> fold_in_theta_from_attributes(const FittedModel& model,
                                                  std::span<const std::uint32_t> tokens);

// Membership estimate for a held-out node from its known partners among the
// fitted nodes. The state variant uses the link-rate posterior; the
// model-only variant substitutes the point estimate (used when only a
// checkpoint is available). Empty input returns the prior mean.
std::vector<double> fold_in_theta_from_links(const FittedModel& model,
                                             const VariationalState& state,
                                             std::span<const std::uint32_t> neighbors);
std::vector<double> fold_in_theta_from_links(const FittedModel& model,
                                             std::span<const std::uint32_t> neighbors);

}  // namespace clsm
