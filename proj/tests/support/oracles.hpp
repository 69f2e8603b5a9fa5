#pragma once

#include "clsm/behavior.hpp"
#include "clsm/graph.hpp"
#include "clsm/hyperparams.hpp"
#include "clsm/state.hpp"

namespace clsm::testing {

// Exact log evidence of the observed links and tokens by exhaustive
// enumeration, feasible only on tiny instances. Every unordered pair draws
// one indicator per endpoint; a matched pair links at its topic's rate, a
// mismatched pair at epsilon; each selection of a linked node picks one
// incident edge uniformly and emits a token from the owner-side indicator's
// topic. Memberships, link rates, and topic rows integrate out in closed
// form (Dirichlet-multinomial / Beta-binomial), so the only sums are over
// indicator and selector assignments. Built on std::lgamma alone; shares no
// code with the production objective.
double enumeration_log_evidence(const Graph& graph, const BehaviorData& behaviors,
                                const Hyperparams& hyper);

// The variational objective recomputed pair by pair and selection by
// selection with no aggregation shortcuts; quadratic in N. Expectation
// values come from clsm::digamma (itself pinned against references
// elsewhere); all structure above them is independent of the production
// path.
double naive_elbo(const VariationalState& state, const Graph& graph,
                  const BehaviorData& behaviors, const Hyperparams& hyper);

}  // namespace clsm::testing
