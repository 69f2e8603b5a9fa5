#include "clsm/state.hpp"

#include <cmath>
#include <string>

#include "clsm/errors.hpp"

namespace clsm {

void Hyperparams::validate() const {
  for (double a : alpha) {
    if (!(a > 0.0)) throw ConfigError("hyperparams: alpha entries must be positive");
  }
  if (alpha.empty()) throw ConfigError("hyperparams: need at least one topic");
  if (!(eta.first > 0.0) || !(eta.second > 0.0)) {
    throw ConfigError("hyperparams: eta must be positive");
  }
  for (double k : kappa) {
    if (!(k > 0.0)) throw ConfigError("hyperparams: kappa entries must be positive");
  }
  if (!(epsilon > 0.0) || !(epsilon < 0.5)) {
    throw ConfigError("hyperparams: epsilon must lie in (0, 0.5)");
  }
}

Hyperparams Hyperparams::symmetric(std::size_t num_topics, std::size_t vocab_size,
                                   double alpha_precision, std::pair<double, double> eta,
                                   double kappa_value, double epsilon) {
  Hyperparams h;
  h.alpha.assign(num_topics, alpha_precision / static_cast<double>(num_topics));
  h.eta = eta;
  h.kappa.assign(vocab_size, kappa_value);
  h.epsilon = epsilon;
  return h;
}

LambdaTable::LambdaTable(const Graph& graph, const BehaviorData& behaviors) {
  offsets_.assign(behaviors.num_entries() + 1, 0);
  for (std::size_t j = 0; j < behaviors.num_entries(); ++j) {
    offsets_[j + 1] = offsets_[j] + graph.degree(behaviors.node_of_entry(j));
  }
  values_.assign(offsets_.back(), 0.0);
}

namespace {

void check_simplex_rows(const Matrix& m, const char* name, double tol = 1e-8) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double total = 0.0;
    for (double v : m.row(r)) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw StateError(std::string(name) + ": negative or non-finite entry in row " +
                         std::to_string(r));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > tol) {
      throw StateError(std::string(name) + ": row " + std::to_string(r) +
                       " sums to " + std::to_string(total));
    }
  }
}

void check_positive(const Matrix& m, const char* name) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double v : m.row(r)) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw StateError(std::string(name) + ": entries must be positive and finite");
      }
    }
  }
}

}  // namespace

void validate_state(const VariationalState& state, const Graph& graph,
                    const BehaviorData& behaviors) {
  const std::size_t n = graph.num_nodes();
  const std::size_t k = state.num_topics();
  if (state.gamma.rows() != n || state.phi_bar.rows() != n) {
    throw StateError("state: gamma/phi_bar row count does not match node count");
  }
  if (state.phi_edge.rows() != graph.num_edges() || state.phi_edge.cols() != k) {
    throw StateError("state: phi_edge shape does not match edge count");
  }
  if (state.phi_bar.cols() != k || state.tau.rows() != k || state.tau.cols() != 2 ||
      state.rho.rows() != k) {
    throw StateError("state: topic dimension mismatch");
  }
  if (state.rho.cols() != behaviors.vocab_size()) {
    throw StateError("state: rho column count does not match vocabulary");
  }
  if (state.lambda.rows() != behaviors.num_entries()) {
    throw StateError("state: lambda row count does not match behavior entries");
  }
  check_positive(state.gamma, "gamma");
  check_positive(state.tau, "tau");
  check_positive(state.rho, "rho");
  check_simplex_rows(state.phi_edge, "phi_edge");
  check_simplex_rows(state.phi_bar, "phi_bar");
  for (std::size_t j = 0; j < state.lambda.rows(); ++j) {
    const auto row = state.lambda.row(j);
    if (row.size() != graph.degree(behaviors.node_of_entry(j))) {
      throw StateError("state: lambda row width does not match node degree");
    }
    if (row.empty()) continue;  // isolated node, nothing to normalize
    double total = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw StateError("lambda: negative or non-finite entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-8) {
      throw StateError("lambda: row " + std::to_string(j) + " sums to " + std::to_string(total));
    }
  }
}

}  // namespace clsm
