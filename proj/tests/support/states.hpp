#pragma once

#include <cstdint>
#include <vector>

#include "clsm/graph.hpp"
#include "clsm/rng.hpp"
#include "clsm/state.hpp"

namespace clsm::testing {

inline std::vector<double> random_simplex(Rng& rng, std::size_t size) {
  std::vector<double> out(size);
  double total = 0.0;
  for (double& x : out) {
    x = 0.05 + rng.next_double();
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

// Valid random state for an instance: simplex rows everywhere they are
// required, positive parameters elsewhere. Exercises paths a fresh
// initializer never reaches.
inline VariationalState random_state(const Graph& graph, const BehaviorData& behaviors,
                                     std::size_t num_topics, Rng& rng) {
  const std::size_t n = graph.num_nodes();
  const std::size_t k = num_topics;
  const std::size_t v = behaviors.vocab_size();
  VariationalState s;
  s.gamma = Matrix(n, k);
  s.phi_bar = Matrix(n, k);
  for (std::size_t node = 0; node < n; ++node) {
    for (std::size_t i = 0; i < k; ++i) s.gamma(node, i) = 0.1 + 3.0 * rng.next_double();
    const auto row = random_simplex(rng, k);
    for (std::size_t i = 0; i < k; ++i) s.phi_bar(node, i) = row[i];
  }
  s.phi_edge = Matrix(graph.num_edges(), k);
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto row = random_simplex(rng, k);
    for (std::size_t i = 0; i < k; ++i) s.phi_edge(e, i) = row[i];
  }
  s.lambda = LambdaTable(graph, behaviors);
  for (std::size_t j = 0; j < s.lambda.rows(); ++j) {
    auto row = s.lambda.row(j);
    if (row.empty()) continue;
    const auto values = random_simplex(rng, row.size());
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = values[c];
  }
  s.tau = Matrix(k, 2);
  for (std::size_t i = 0; i < k; ++i) {
    s.tau(i, 0) = 0.2 + 5.0 * rng.next_double();
    s.tau(i, 1) = 0.2 + 5.0 * rng.next_double();
  }
  s.rho = Matrix(k, v);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < v; ++j) s.rho(i, j) = 0.05 + 2.0 * rng.next_double();
  }
  return s;
}

}  // namespace clsm::testing
