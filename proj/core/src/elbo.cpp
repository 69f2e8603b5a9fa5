#include <cmath>
#include <vector>

#include "clsm/inference.hpp"
#include "clsm/math.hpp"

namespace clsm {
namespace detail {

double objective_impl(const VariationalState& state, const Graph& graph,
                      const BehaviorData& behaviors, const Hyperparams& hyper,
                      const Matrix* log_omega_override, double smoothing_delta,
                      ElboBreakdown* breakdown) {
  validate_state(state, graph, behaviors);
  const std::size_t n = graph.num_nodes();
  const std::size_t k = state.num_topics();
  const std::size_t v = behaviors.vocab_size();
  const bool point_omega = log_omega_override != nullptr;

  Matrix elog_theta(n, k);
  for (std::size_t node = 0; node < n; ++node) {
    dirichlet_expect_log(state.gamma.row(node), elog_theta.row(node));
  }
  std::vector<double> elog_beta(k);
  std::vector<double> elog_beta_c(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto [lb, lbc] = beta_expect_logs(state.tau(i, 0), state.tau(i, 1));
    elog_beta[i] = lb;
    elog_beta_c[i] = lbc;
  }
  Matrix elog_omega_local;
  const Matrix* elog_omega = log_omega_override;
  if (!point_omega) {
    elog_omega_local = Matrix(k, v);
    for (std::size_t i = 0; i < k; ++i) {
      dirichlet_expect_log(state.rho.row(i), elog_omega_local.row(i));
    }
    elog_omega = &elog_omega_local;
  }

  ElboBreakdown b;

  // Linked pairs: likelihood and indicator prior under the shared edge weights.
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Graph::Edge& edge = graph.edge(e);
    const auto pe = state.phi_edge.row(e);
    const auto ta = elog_theta.row(edge.a);
    const auto tb = elog_theta.row(edge.b);
    for (std::size_t i = 0; i < k; ++i) {
      b.link_lik += pe[i] * elog_beta[i];
      b.z_prior_links += pe[i] * (ta[i] + tb[i]);
      if (pe[i] > 0.0) b.z_entropy -= pe[i] * std::log(pe[i]);
    }
  }

  // Non-link pairs, aggregated per topic and per node.
  const std::vector<double> products = nonlink_pair_products(state.phi_bar, graph);
  double matched_mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    b.nonlink_lik += products[i] * elog_beta_c[i];
    matched_mass += products[i];
  }
  b.nonlink_lik +=
      (static_cast<double>(graph.num_nonlink_pairs()) - matched_mass) * std::log1p(-hyper.epsilon);
  for (std::size_t node = 0; node < n; ++node) {
    const double weight = static_cast<double>(n - 1 - graph.degree(node));
    if (weight == 0.0) continue;
    const auto bar = state.phi_bar.row(node);
    const auto tn = elog_theta.row(node);
    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot += bar[i] * tn[i];
    b.z_prior_nonlinks += weight * dot;
    b.z_entropy += weight * entropy(bar);
  }

  // Selections: token likelihood, uniform pick prior, assignment entropy.
  for (std::size_t j = 0; j < behaviors.num_entries(); ++j) {
    const auto lam = state.lambda.row(j);
    if (lam.empty()) continue;  // isolated node: its tokens are outside the model
    const std::uint32_t node = behaviors.node_of_entry(j);
    const auto& entry = behaviors.entry(j);
    const auto incident = graph.incident_edges(node);
    const double* omega_col = elog_omega->data() + entry.token;
    double lik = 0.0;
    double ent = 0.0;
    for (std::size_t c = 0; c < lam.size(); ++c) {
      if (lam[c] == 0.0) continue;
      const auto pe = state.phi_edge.row(incident[c]);
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += pe[i] * omega_col[i * v];
      lik += lam[c] * dot;
      ent -= lam[c] * std::log(lam[c]);
    }
    const double count = static_cast<double>(entry.count);
    b.behavior_lik += count * lik;
    b.c_entropy += count * ent;
  }
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t degree = graph.degree(node);
    if (degree > 0 && behaviors.total(node) > 0) {
      b.c_prior -= static_cast<double>(behaviors.total(node)) *
                   std::log(static_cast<double>(degree));
    }
  }

  // Membership prior and posterior entropy.
  const double log_b_alpha = log_multi_beta(hyper.alpha);
  for (std::size_t node = 0; node < n; ++node) {
    const auto tn = elog_theta.row(node);
    const auto g = state.gamma.row(node);
    double prior_dot = 0.0;
    double post_dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      prior_dot += (hyper.alpha[i] - 1.0) * tn[i];
      post_dot += (g[i] - 1.0) * tn[i];
    }
    b.theta_prior += prior_dot - log_b_alpha;
    b.theta_entropy += log_multi_beta(g) - post_dot;
  }

  // Link-rate prior and posterior entropy.
  const double log_b_eta = log_beta(hyper.eta.first, hyper.eta.second);
  for (std::size_t i = 0; i < k; ++i) {
    b.beta_prior += (hyper.eta.first - 1.0) * elog_beta[i] +
                    (hyper.eta.second - 1.0) * elog_beta_c[i] - log_b_eta;
    b.beta_entropy += log_beta(state.tau(i, 0), state.tau(i, 1)) -
                      (state.tau(i, 0) - 1.0) * elog_beta[i] -
                      (state.tau(i, 1) - 1.0) * elog_beta_c[i];
  }

  // Topic-token terms: full posterior treatment, or the smoothing regularizer
  // when a point estimate is plugged in.
  if (point_omega) {
    double log_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (double x : elog_omega->row(i)) log_sum += x;
    }
    b.omega_prior = smoothing_delta * log_sum;
  } else {
    const double log_b_kappa = log_multi_beta(hyper.kappa);
    for (std::size_t i = 0; i < k; ++i) {
      const auto er = elog_omega->row(i);
      const auto rr = state.rho.row(i);
      double prior_dot = 0.0;
      double post_dot = 0.0;
      for (std::size_t j = 0; j < v; ++j) {
        prior_dot += (hyper.kappa[j] - 1.0) * er[j];
        post_dot += (rr[j] - 1.0) * er[j];
      }
      b.omega_prior += prior_dot - log_b_kappa;
      b.omega_entropy += log_multi_beta(rr) - post_dot;
    }
  }

  b.total = b.link_lik + b.nonlink_lik + b.z_prior_links + b.z_prior_nonlinks +
            b.behavior_lik + b.c_prior + b.theta_prior + b.beta_prior + b.omega_prior +
            b.z_entropy + b.c_entropy + b.theta_entropy + b.beta_entropy + b.omega_entropy;
  if (breakdown != nullptr) *breakdown = b;
  return b.total;
}

}  // namespace detail

double compute_elbo(const VariationalState& state, const Graph& graph,
                    const BehaviorData& behaviors, const Hyperparams& hyper) {
  return detail::objective_impl(state, graph, behaviors, hyper, nullptr, 0.0, nullptr);
}

ElboBreakdown compute_elbo_breakdown(const VariationalState& state, const Graph& graph,
                                     const BehaviorData& behaviors, const Hyperparams& hyper) {
  ElboBreakdown b;
  detail::objective_impl(state, graph, behaviors, hyper, nullptr, 0.0, &b);
  return b;
}

}  // namespace clsm
