#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clsm/behavior.hpp"
#include "clsm/graph.hpp"
#include "clsm/hyperparams.hpp"
#include "clsm/matrix.hpp"

namespace clsm {

// Ragged row store for the per-selection assignment weights. Row j belongs to
// behavior entry j (see BehaviorData) and has one column per edge incident to
// the owning node, aligned with Graph::incident_edges. Occurrences of the
// same token within a node share one row; their update depends only on the
// token, so the shared row is exact and entry counts weight the sums.
class LambdaTable {
 public:
  LambdaTable() = default;
  LambdaTable(const Graph& graph, const BehaviorData& behaviors);

  std::span<double> row(std::size_t entry) {
    return {values_.data() + offsets_[entry], offsets_[entry + 1] - offsets_[entry]};
  }
  std::span<const double> row(std::size_t entry) const {
    return {values_.data() + offsets_[entry], offsets_[entry + 1] - offsets_[entry]};
  }
  std::size_t rows() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  friend bool operator==(const LambdaTable&, const LambdaTable&) = default;

 private:
  std::vector<double> values_;
  std::vector<std::size_t> offsets_;
};

// Parameters of the factored variational posterior.
//   gamma    N x K   Dirichlet over each node's memberships
//   phi_edge E x K   shared topic weights for each linked pair's indicators
//   phi_bar  N x K   tied topic weights standing in for all non-link indicators
//   lambda   ragged  per-selection weights over the owner's incident edges
//   tau      K x 2   Beta over per-topic link rates
//   rho      K x V   Dirichlet over topic-token weights
struct VariationalState {
  Matrix gamma;
  Matrix phi_edge;
  Matrix phi_bar;
  LambdaTable lambda;
  Matrix tau;
  Matrix rho;

  std::size_t num_topics() const { return gamma.cols(); }

  friend bool operator==(const VariationalState&, const VariationalState&) = default;
};

// Throws StateError if dimensions disagree with the data or any row violates
// its simplex/positivity invariant (tolerance 1e-8 on row sums).
void validate_state(const VariationalState& state, const Graph& graph,
                    const BehaviorData& behaviors);

// Point estimates and metadata extracted from a converged (or stopped) run.
struct FittedModel {
  Matrix theta_hat;               // N x K, rows on the simplex
  std::vector<double> beta_hat;   // K, in (0, 1)
  Matrix omega_hat;               // K x V, rows on the simplex
  Hyperparams hyper;
  std::vector<double> elbo_trace;
  std::uint64_t iterations = 0;
};

}  // namespace clsm
