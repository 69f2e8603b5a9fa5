#include "clsm/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "clsm/errors.hpp"
#include "clsm/math.hpp"
#include "clsm/parallel.hpp"
#include "clsm/rng.hpp"

namespace clsm {

Hyperparams FitConfig::hyper(std::size_t vocab_size) const {
  return Hyperparams::symmetric(num_topics, vocab_size, alpha_precision, eta, kappa_value,
                                epsilon);
}

void FitConfig::validate() const {
  if (num_topics == 0) throw ConfigError("fit config: num_topics must be positive");
  if (max_iterations == 0) throw ConfigError("fit config: max_iterations must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("fit config: rel_tol must be positive");
  if (!(alpha_precision > 0.0)) throw ConfigError("fit config: alpha_precision must be positive");
  if (!(eta.first > 0.0) || !(eta.second > 0.0)) {
    throw ConfigError("fit config: eta must be positive");
  }
  if (!(kappa_value > 0.0)) throw ConfigError("fit config: kappa_value must be positive");
  if (!(epsilon > 0.0) || !(epsilon < 0.5)) {
    throw ConfigError("fit config: epsilon must lie in (0, 0.5)");
  }
  if (!(smoothing_pseudocount > 0.0)) {
    throw ConfigError("fit config: smoothing_pseudocount must be positive");
  }
  if (threads == 0) throw ConfigError("fit config: threads must be positive");
  if (num_restarts == 0) throw ConfigError("fit config: num_restarts must be positive");
  if (!(init_jitter > 0.0) || !std::isfinite(init_jitter)) {
    throw ConfigError("fit config: init_jitter must be positive and finite");
  }
}

std::vector<double> nonlink_pair_products(const Matrix& phi_bar, const Graph& graph) {
  const std::size_t k = phi_bar.cols();
  std::vector<double> sums(k, 0.0);
  std::vector<double> sq_sums(k, 0.0);
  for (std::size_t n = 0; n < phi_bar.rows(); ++n) {
    const auto row = phi_bar.row(n);
    for (std::size_t i = 0; i < k; ++i) {
      sums[i] += row[i];
      sq_sums[i] += row[i] * row[i];
    }
  }
  std::vector<double> products(k);
  for (std::size_t i = 0; i < k; ++i) {
    products[i] = 0.5 * (sums[i] * sums[i] - sq_sums[i]);
  }
  for (const Graph::Edge& e : graph.edges()) {
    const auto ra = phi_bar.row(e.a);
    const auto rb = phi_bar.row(e.b);
    for (std::size_t i = 0; i < k; ++i) products[i] -= ra[i] * rb[i];
  }
  return products;
}

CoordinateAscent::CoordinateAscent(const Graph& graph, const BehaviorData& behaviors,
                                   FitConfig config)
    : graph_(graph), behaviors_(behaviors), cfg_(std::move(config)) {
  cfg_.validate();
  if (behaviors_.num_nodes() != graph_.num_nodes()) {
    throw ConfigError("fit: behavior node count " + std::to_string(behaviors_.num_nodes()) +
                      " does not match graph node count " + std::to_string(graph_.num_nodes()));
  }
  hyper_ = cfg_.hyper(behaviors_.vocab_size());
  hyper_.validate();
}

VariationalState CoordinateAscent::make_initial_state() const {
  const std::size_t n = graph_.num_nodes();
  const std::size_t k = cfg_.num_topics;
  const std::size_t v = behaviors_.vocab_size();
  const Rng root(cfg_.seed);

  std::size_t max_degree = 0;
  for (std::uint32_t node = 0; node < n; ++node) {
    max_degree = std::max(max_degree, graph_.degree(node));
  }

  VariationalState s;
  s.gamma = Matrix(n, k);
  for (std::uint32_t node = 0; node < n; ++node) {
    Rng r = root.stream(streams::kInitGamma, node);
    const double scale =
        0.1 * static_cast<double>(graph_.degree(node) + 1) / static_cast<double>(max_degree + 1);
    for (std::size_t i = 0; i < k; ++i) {
      s.gamma(node, i) = hyper_.alpha[i] + scale * r.next_double_open();
    }
  }

  s.phi_edge = Matrix(graph_.num_edges(), k);
  for (std::size_t e = 0; e < graph_.num_edges(); ++e) {
    Rng r = root.stream(streams::kInitPhi, e);
    auto row = s.phi_edge.row(e);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      row[i] = 1.0 + cfg_.init_jitter * r.next_double_open();
      total += row[i];
    }
    for (std::size_t i = 0; i < k; ++i) row[i] /= total;
  }

  s.lambda = LambdaTable(graph_, behaviors_);
  for (std::size_t j = 0; j < s.lambda.rows(); ++j) {
    auto row = s.lambda.row(j);
    if (row.empty()) continue;
    const double uniform = 1.0 / static_cast<double>(row.size());
    for (double& x : row) x = uniform;
  }

  s.tau = Matrix(k, 2);
  for (std::size_t i = 0; i < k; ++i) {
    s.tau(i, 0) = hyper_.eta.first;
    s.tau(i, 1) = hyper_.eta.second;
  }

  s.rho = Matrix(k, v);
  for (std::size_t i = 0; i < k; ++i) {
    Rng r = root.stream(streams::kInitRho, i);
    for (std::size_t j = 0; j < v; ++j) {
      s.rho(i, j) = hyper_.kappa[j] * (1.0 + 0.1 * r.next_double_open());
    }
  }

  // Seed the non-link stand-ins with the mean of the incident edge weights
  // (membership responsibility when isolated); the sweep replaces them with
  // exact coordinate updates.
  s.phi_bar = Matrix(n, k);
  std::vector<double> elog(k);
  for (std::uint32_t node = 0; node < n; ++node) {
    auto row = s.phi_bar.row(node);
    const auto incident = graph_.incident_edges(node);
    if (incident.empty()) {
      dirichlet_expect_log(s.gamma.row(node), elog);
      normalize_log_simplex(elog, row);
    } else {
      for (std::uint32_t e : incident) {
        const auto pe = s.phi_edge.row(e);
        for (std::size_t i = 0; i < k; ++i) row[i] += pe[i];
      }
      for (std::size_t i = 0; i < k; ++i) row[i] /= static_cast<double>(incident.size());
    }
  }
  return s;
}

void CoordinateAscent::set_state(VariationalState state) {
  validate_state(state, graph_, behaviors_);
  if (state.num_topics() != cfg_.num_topics) {
    throw StateError("state: topic count does not match fit config");
  }
  state_ = std::move(state);
  // Expectation caches always mirror the current state; every consumer
  // (sweep, per-op updates, objective) can rely on that without a separate
  // refresh call.
  refresh_expectations();
}

void CoordinateAscent::require_state() const {
  if (state_.gamma.empty()) {
    throw StateError("engine has no state; call run, sweep, or set_state first");
  }
}

void CoordinateAscent::refresh_elog_theta() {
  const std::size_t n = graph_.num_nodes();
  if (elog_theta_.rows() != n) elog_theta_ = Matrix(n, cfg_.num_topics);
  for (std::size_t node = 0; node < n; ++node) {
    dirichlet_expect_log(state_.gamma.row(node), elog_theta_.row(node));
  }
}

void CoordinateAscent::refresh_elog_beta() {
  const std::size_t k = cfg_.num_topics;
  elog_beta_.resize(k);
  elog_beta_c_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto [lb, lbc] = beta_expect_logs(state_.tau(i, 0), state_.tau(i, 1));
    elog_beta_[i] = lb;
    elog_beta_c_[i] = lbc;
  }
}

void CoordinateAscent::refresh_elog_omega() {
  const std::size_t k = cfg_.num_topics;
  const std::size_t v = behaviors_.vocab_size();
  if (elog_omega_.rows() != k) elog_omega_ = Matrix(k, v);
  if (cfg_.omega_mode == FitConfig::OmegaMode::kDirectWithSmoothing) {
    if (omega_hat_.rows() != k) {
      // Before the first sweep the point estimate is uniform.
      omega_hat_ = Matrix(k, v, v > 0 ? 1.0 / static_cast<double>(v) : 0.0);
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < v; ++j) elog_omega_(i, j) = std::log(omega_hat_(i, j));
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      dirichlet_expect_log(state_.rho.row(i), elog_omega_.row(i));
    }
  }
}

void CoordinateAscent::refresh_expectations() {
  refresh_elog_theta();
  refresh_elog_beta();
  refresh_elog_omega();
}

void CoordinateAscent::edge_phi_update(std::size_t edge_id, std::span<double> out) const {
  const std::size_t k = cfg_.num_topics;
  const Graph::Edge& e = graph_.edge(edge_id);
  const auto ta = elog_theta_.row(e.a);
  const auto tb = elog_theta_.row(e.b);
  for (std::size_t i = 0; i < k; ++i) out[i] = ta[i] + tb[i] + elog_beta_[i];
  for (const std::uint32_t node : {e.a, e.b}) {
    const std::uint32_t col = graph_.incident_ordinal(edge_id, node);
    const auto [first, last] = behaviors_.entry_range(node);
    for (std::size_t j = first; j < last; ++j) {
      const auto& entry = behaviors_.entry(j);
      const double weight = static_cast<double>(entry.count) * state_.lambda.row(j)[col];
      if (weight == 0.0) continue;
      const double* omega_col = elog_omega_.data() + entry.token;
      const std::size_t v = elog_omega_.cols();
      for (std::size_t i = 0; i < k; ++i) out[i] += weight * omega_col[i * v];
    }
  }
  normalize_log_simplex({out.data(), k}, out);
}

std::vector<double> CoordinateAscent::edge_phi_update(std::size_t edge_id) const {
  require_state();
  std::vector<double> out(cfg_.num_topics);
  edge_phi_update(edge_id, out);
  return out;
}

void CoordinateAscent::lambda_row_update(std::size_t entry_id, std::span<double> out) const {
  if (out.empty()) return;  // isolated node: nothing to assign
  const std::size_t k = cfg_.num_topics;
  const std::uint32_t node = behaviors_.node_of_entry(entry_id);
  const std::uint32_t token = behaviors_.entry(entry_id).token;
  const auto incident = graph_.incident_edges(node);
  const double* omega_col = elog_omega_.data() + token;
  const std::size_t v = elog_omega_.cols();
  for (std::size_t c = 0; c < incident.size(); ++c) {
    const auto pe = state_.phi_edge.row(incident[c]);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += pe[i] * omega_col[i * v];
    out[c] = acc;
  }
  normalize_log_simplex({out.data(), out.size()}, out);
}

std::vector<double> CoordinateAscent::lambda_row_update(std::size_t entry_id) const {
  require_state();
  std::vector<double> out(graph_.degree(behaviors_.node_of_entry(entry_id)));
  lambda_row_update(entry_id, out);
  return out;
}

void CoordinateAscent::gamma_update(std::uint32_t node, std::span<double> out) const {
  const std::size_t k = cfg_.num_topics;
  const double nonlinks =
      static_cast<double>(graph_.num_nodes() - 1 - graph_.degree(node));
  const auto bar = state_.phi_bar.row(node);
  for (std::size_t i = 0; i < k; ++i) out[i] = hyper_.alpha[i] + nonlinks * bar[i];
  for (const std::uint32_t e : graph_.incident_edges(node)) {
    const auto pe = state_.phi_edge.row(e);
    for (std::size_t i = 0; i < k; ++i) out[i] += pe[i];
  }
}

std::vector<double> CoordinateAscent::gamma_update(std::uint32_t node) const {
  require_state();
  std::vector<double> out(cfg_.num_topics);
  gamma_update(node, out);
  return out;
}

void CoordinateAscent::phi_bar_update(std::uint32_t node, std::span<double> out,
                                      std::span<const double> col_sums) const {
  const std::size_t k = cfg_.num_topics;
  const auto et = elog_theta_.row(node);
  const double nonlinks =
      static_cast<double>(graph_.num_nodes() - 1 - graph_.degree(node));
  if (nonlinks == 0.0) {
    // The stand-in carries zero weight in the bound; any simplex value works.
    normalize_log_simplex(et, out);
    return;
  }
  // R_{n,k}: stand-in mass of this node's non-partners. `out` may alias this
  // node's own row, so each element is read before it is overwritten.
  const auto self = state_.phi_bar.row(node);
  for (std::size_t i = 0; i < k; ++i) out[i] = col_sums[i] - self[i];
  for (const std::uint32_t m : graph_.neighbors(node)) {
    const auto pm = state_.phi_bar.row(m);
    for (std::size_t i = 0; i < k; ++i) out[i] -= pm[i];
  }
  const double log_eps_c = std::log1p(-hyper_.epsilon);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = et[i] + (elog_beta_c_[i] - log_eps_c) * out[i] / nonlinks;
  }
  normalize_log_simplex({out.data(), k}, out);
}

std::vector<double> CoordinateAscent::phi_bar_update(std::uint32_t node) const {
  require_state();
  const std::size_t k = cfg_.num_topics;
  std::vector<double> sums(k, 0.0);
  for (std::size_t n = 0; n < graph_.num_nodes(); ++n) {
    const auto row = state_.phi_bar.row(n);
    for (std::size_t i = 0; i < k; ++i) sums[i] += row[i];
  }
  std::vector<double> out(k);
  phi_bar_update(node, out, sums);
  return out;
}

Matrix CoordinateAscent::tau_update() const {
  require_state();
  const std::size_t k = cfg_.num_topics;
  Matrix tau(k, 2);
  std::vector<double> link_sums(k, 0.0);
  for (std::size_t e = 0; e < graph_.num_edges(); ++e) {
    const auto pe = state_.phi_edge.row(e);
    for (std::size_t i = 0; i < k; ++i) link_sums[i] += pe[i];
  }
  const std::vector<double> products = nonlink_pair_products(state_.phi_bar, graph_);
  for (std::size_t i = 0; i < k; ++i) {
    tau(i, 0) = hyper_.eta.first + link_sums[i];
    tau(i, 1) = hyper_.eta.second + products[i];
  }
  return tau;
}

Matrix CoordinateAscent::rho_update() const {
  require_state();
  const std::size_t k = cfg_.num_topics;
  const std::size_t v = behaviors_.vocab_size();
  Matrix rho(k, v);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < v; ++j) rho(i, j) = hyper_.kappa[j];
  }
  std::vector<double> acc(k);
  for (std::size_t j = 0; j < behaviors_.num_entries(); ++j) {
    const auto lam = state_.lambda.row(j);
    if (lam.empty()) continue;
    const std::uint32_t node = behaviors_.node_of_entry(j);
    const auto incident = graph_.incident_edges(node);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t c = 0; c < lam.size(); ++c) {
      const auto pe = state_.phi_edge.row(incident[c]);
      for (std::size_t i = 0; i < k; ++i) acc[i] += lam[c] * pe[i];
    }
    const auto& entry = behaviors_.entry(j);
    const double count = static_cast<double>(entry.count);
    for (std::size_t i = 0; i < k; ++i) rho(i, entry.token) += count * acc[i];
  }
  return rho;
}

Matrix CoordinateAscent::omega_direct_update() const {
  require_state();
  const std::size_t k = cfg_.num_topics;
  const std::size_t v = behaviors_.vocab_size();
  Matrix counts(k, v, 0.0);
  std::vector<double> acc(k);
  for (std::size_t j = 0; j < behaviors_.num_entries(); ++j) {
    const auto lam = state_.lambda.row(j);
    if (lam.empty()) continue;
    const std::uint32_t node = behaviors_.node_of_entry(j);
    const auto incident = graph_.incident_edges(node);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t c = 0; c < lam.size(); ++c) {
      const auto pe = state_.phi_edge.row(incident[c]);
      for (std::size_t i = 0; i < k; ++i) acc[i] += lam[c] * pe[i];
    }
    const auto& entry = behaviors_.entry(j);
    const double count = static_cast<double>(entry.count);
    for (std::size_t i = 0; i < k; ++i) counts(i, entry.token) += count * acc[i];
  }
  const double delta = cfg_.smoothing_pseudocount;
  for (std::size_t i = 0; i < k; ++i) {
    auto row = counts.row(i);
    double total = 0.0;
    for (double& x : row) {
      x += delta;
      total += x;
    }
    for (double& x : row) x /= total;
  }
  return counts;
}

void CoordinateAscent::sweep() {
  if (state_.gamma.empty()) set_state(make_initial_state());
  const std::size_t threads = cfg_.threads;
  parallel_for(0, graph_.num_edges(), threads,
               [&](std::size_t e) { edge_phi_update(e, state_.phi_edge.row(e)); });
  parallel_for(0, behaviors_.num_entries(), threads,
               [&](std::size_t j) { lambda_row_update(j, state_.lambda.row(j)); });
  for (std::uint32_t node = 0; node < graph_.num_nodes(); ++node) {
    gamma_update(node, state_.gamma.row(node));
  }
  refresh_elog_theta();
  {
    // Sequential pass with running column sums: each node's stand-in is the
    // exact maximizer given every earlier update, so the phase cannot lower
    // the bound. A simultaneous pass could, because stand-ins couple through
    // the non-link likelihood.
    const std::size_t k = cfg_.num_topics;
    std::vector<double> sums(k, 0.0);
    for (std::size_t n = 0; n < graph_.num_nodes(); ++n) {
      const auto row = state_.phi_bar.row(n);
      for (std::size_t i = 0; i < k; ++i) sums[i] += row[i];
    }
    std::vector<double> fresh(k);
    for (std::uint32_t node = 0; node < graph_.num_nodes(); ++node) {
      phi_bar_update(node, fresh, sums);
      auto row = state_.phi_bar.row(node);
      for (std::size_t i = 0; i < k; ++i) {
        sums[i] += fresh[i] - row[i];
        row[i] = fresh[i];
      }
    }
  }
  state_.tau = tau_update();
  refresh_elog_beta();
  state_.rho = rho_update();
  if (cfg_.omega_mode == FitConfig::OmegaMode::kDirectWithSmoothing) {
    omega_hat_ = omega_direct_update();
  }
  refresh_elog_omega();
}

FittedModel CoordinateAscent::extract_model() const {
  FittedModel model;
  model.hyper = hyper_;
  const std::size_t n = graph_.num_nodes();
  const std::size_t k = cfg_.num_topics;
  model.theta_hat = Matrix(n, k);
  for (std::size_t node = 0; node < n; ++node) {
    const auto g = state_.gamma.row(node);
    double total = 0.0;
    for (double x : g) total += x;
    for (std::size_t i = 0; i < k; ++i) model.theta_hat(node, i) = g[i] / total;
  }
  model.beta_hat.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    model.beta_hat[i] = state_.tau(i, 0) / (state_.tau(i, 0) + state_.tau(i, 1));
  }
  if (cfg_.omega_mode == FitConfig::OmegaMode::kDirectWithSmoothing) {
    model.omega_hat = omega_hat_;
  } else {
    const std::size_t v = behaviors_.vocab_size();
    model.omega_hat = Matrix(k, v);
    for (std::size_t i = 0; i < k; ++i) {
      const auto r = state_.rho.row(i);
      double total = 0.0;
      for (double x : r) total += x;
      for (std::size_t j = 0; j < v; ++j) model.omega_hat(i, j) = r[j] / total;
    }
  }
  return model;
}

double CoordinateAscent::objective() const {
  require_state();
  if (cfg_.omega_mode == FitConfig::OmegaMode::kVariationalRho) {
    return compute_elbo(state_, graph_, behaviors_, hyper_);
  }
  // EM surrogate: the bound with the point estimate plugged in for the
  // topic-token parameters, plus the smoothing regularizer whose maximizer
  // is exactly the smoothed direct update. elog_omega_ caches log omega_hat.
  return detail::objective_impl(state_, graph_, behaviors_, hyper_, &elog_omega_,
                                cfg_.smoothing_pseudocount, nullptr);
}

FitOutput CoordinateAscent::run() {
  if (state_.gamma.empty()) set_state(make_initial_state());

  FitOutput out;
  auto& trace = out.report.elbo_trace;
  trace.push_back(objective());
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t sweeps = 0;
  for (std::size_t it = 1; it <= cfg_.max_iterations; ++it) {
    sweep();
    ++sweeps;
    const double value = objective();
    if (!std::isfinite(value)) {
      throw NumericalError("fit: objective became non-finite at iteration " + std::to_string(it));
    }
    const double prev = trace.back();
    trace.push_back(value);
    const double denom = std::abs(prev) > 0.0 ? std::abs(prev) : 1.0;
    if (std::abs(value - prev) < cfg_.rel_tol * denom) {
      out.report.converged = true;
      break;
    }
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  out.report.iterations = sweeps;
  out.report.wall_time_per_iteration = sweeps > 0 ? elapsed.count() / static_cast<double>(sweeps) : 0.0;

  out.model = extract_model();
  out.model.elbo_trace = trace;
  out.model.iterations = sweeps;
  out.state = state_;
  return out;
}

VariationalState init_state(const Graph& graph, const BehaviorData& behaviors,
                            const FitConfig& config) {
  return CoordinateAscent(graph, behaviors, config).make_initial_state();
}

FitOutput fit(const Graph& graph, const BehaviorData& behaviors, const FitConfig& config) {
  config.validate();
  // Restart 0 keeps the caller's seed and jitter verbatim, so num_restarts
  // == 1 is bitwise-identical to a single run. Later restarts draw derived
  // seeds and a spread-out init: near-uniform starts cluster around the
  // ridge between basins, so diversifying the start point is what lets a
  // restart actually land somewhere new. The run with the best final
  // objective wins.
  constexpr double kRestartJitter = 4.0;
  FitOutput best;
  const Rng root(config.seed);
  for (std::size_t r = 0; r < config.num_restarts; ++r) {
    FitConfig local = config;
    if (r > 0) {
      local.seed = root.stream(streams::kRestart, r).next_u64();
      local.init_jitter = std::max(config.init_jitter, kRestartJitter);
    }
    CoordinateAscent engine(graph, behaviors, local);
    FitOutput out = engine.run();
    if (r == 0 || out.report.elbo_trace.back() > best.report.elbo_trace.back()) {
      best = std::move(out);
    }
  }
  return best;
}

FitOutput fit_from_state(const Graph& graph, const BehaviorData& behaviors,
                         const FitConfig& config, VariationalState initial) {
  // The caller supplied the starting point, so restarts do not apply here.
  CoordinateAscent engine(graph, behaviors, config);
  engine.set_state(std::move(initial));
  return engine.run();
}

}  // namespace clsm
