#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "clsm/behavior.hpp"
#include "clsm/errors.hpp"
#include "clsm/graph.hpp"
#include "clsm/hyperparams.hpp"
#include "clsm/rng.hpp"
#include "clsm/state.hpp"
#include "doctest.h"
#include "states.hpp"

using namespace clsm;

namespace {

using Pair = std::pair<std::uint32_t, std::uint32_t>;
using Triple = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;

Graph make_graph(std::size_t n, std::vector<Pair> pairs) {
  return Graph::from_pairs(n, pairs);
}

}  // namespace

TEST_CASE("graph canonicalizes orientation and collapses duplicates") {
  // (2,1) flips to (1,2); the repeated (0,1)/(1,0) pair collapses once.
  const auto g = make_graph(4, {{2, 1}, {0, 1}, {1, 0}, {3, 0}});
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_edges() == 3);
  CHECK(g.edge(0).a == 0);
  CHECK(g.edge(0).b == 1);
  CHECK(g.edge(1).a == 0);
  CHECK(g.edge(1).b == 3);
  CHECK(g.edge(2).a == 1);
  CHECK(g.edge(2).b == 2);
  CHECK(g.has_edge(1, 2));
  CHECK(g.has_edge(2, 1));
  CHECK_FALSE(g.has_edge(2, 3));
  CHECK(g.edge_id(3, 0) == 1);
  CHECK_THROWS_AS(g.edge_id(2, 3), DataError);
}

TEST_CASE("graph rejects self-loops and out-of-range endpoints") {
  CHECK_THROWS_AS(make_graph(3, {{1, 1}}), DataError);
  CHECK_THROWS_AS(make_graph(3, {{0, 3}}), DataError);
  CHECK_THROWS_AS(make_graph(0, {{0, 1}}), DataError);
}

TEST_CASE("neighbor and incident-edge lists stay sorted and aligned") {
  const auto g = make_graph(5, {{0, 4}, {0, 1}, {0, 2}, {2, 4}});
  const auto nbrs = g.neighbors(0);
  REQUIRE(nbrs.size() == 3);
  CHECK(nbrs[0] == 1);
  CHECK(nbrs[1] == 2);
  CHECK(nbrs[2] == 4);
  const auto inc = g.incident_edges(0);
  // Edge ids sorted by edge: (0,1)=0, (0,2)=1, (0,4)=2, (2,4)=3.
  CHECK(inc[0] == 0);
  CHECK(inc[1] == 1);
  CHECK(inc[2] == 2);
  CHECK(g.degree(0) == 3);
  CHECK(g.degree(3) == 0);
  // Ordinal of edge e inside each endpoint's incident list.
  CHECK(g.incident_ordinal(2, 0) == 2);  // (0,4) is 0's third incident edge
  CHECK(g.incident_ordinal(2, 4) == 0);  // ...and 4's first
  CHECK(g.incident_ordinal(3, 4) == 1);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    CHECK(g.incident_edges(ed.a)[g.incident_ordinal(e, ed.a)] == e);
    CHECK(g.incident_edges(ed.b)[g.incident_ordinal(e, ed.b)] == e);
  }
}

TEST_CASE("pair bookkeeping counts links and non-links") {
  const auto g = make_graph(5, {{0, 1}, {2, 3}});
  CHECK(g.num_pairs() == 10);
  CHECK(g.num_nonlink_pairs() == 8);
}

TEST_CASE("behaviors aggregate duplicate tokens and keep entries sorted") {
  const std::vector<Triple> triples{{1, 3, 2}, {0, 1, 1}, {1, 3, 1}, {1, 0, 4}};
  const auto b = BehaviorData::from_triples(3, 5, triples);
  CHECK(b.num_nodes() == 3);
  CHECK(b.vocab_size() == 5);
  CHECK(b.num_entries() == 3);
  CHECK(b.total(0) == 1);
  CHECK(b.total(1) == 7);
  CHECK(b.total(2) == 0);
  CHECK(b.total_selections() == 8);
  const auto e1 = b.entries(1);
  REQUIRE(e1.size() == 2);
  CHECK(e1[0].token == 0);
  CHECK(e1[0].count == 4);
  CHECK(e1[1].token == 3);
  CHECK(e1[1].count == 3);
  CHECK(b.entries(2).empty());
  // Flat-entry addressing agrees with the per-node views.
  const auto [first, last] = b.entry_range(1);
  CHECK(last - first == 2);
  CHECK(b.entry(first).token == 0);
  CHECK(b.node_of_entry(first) == 1);
  CHECK(b.node_of_entry(last - 1) == 1);
}

TEST_CASE("behaviors reject bad triples") {
  CHECK_THROWS_AS(BehaviorData::from_triples(2, 3, std::vector<Triple>{{2, 0, 1}}), DataError);
  CHECK_THROWS_AS(BehaviorData::from_triples(2, 3, std::vector<Triple>{{0, 3, 1}}), DataError);
  CHECK_THROWS_AS(BehaviorData::from_triples(2, 3, std::vector<Triple>{{0, 0, 0}}), DataError);
}

TEST_CASE("behavior equality is structural") {
  const std::vector<Triple> t1{{0, 1, 2}, {1, 0, 1}};
  const std::vector<Triple> t2{{1, 0, 1}, {0, 1, 1}, {0, 1, 1}};
  CHECK(BehaviorData::from_triples(2, 2, t1) == BehaviorData::from_triples(2, 2, t2));
  const std::vector<Triple> t3{{1, 0, 2}, {0, 1, 2}};
  CHECK_FALSE(BehaviorData::from_triples(2, 2, t1) == BehaviorData::from_triples(2, 2, t3));
}

TEST_CASE("symmetric hyperparameters spread the membership precision over topics") {
  const auto h = Hyperparams::symmetric(4, 6, 2.0, {3.0, 5.0}, 0.25, 1e-4);
  CHECK(h.num_topics() == 4);
  CHECK(h.vocab_size() == 6);
  for (double a : h.alpha) CHECK(a == doctest::Approx(0.5));
  for (double k : h.kappa) CHECK(k == doctest::Approx(0.25));
  CHECK(h.eta.first == 3.0);
  CHECK(h.eta.second == 5.0);
  CHECK(h.epsilon == 1e-4);
  CHECK_NOTHROW(h.validate());
}

TEST_CASE("hyperparameter validation rejects nonpositive or out-of-range values") {
  auto h = Hyperparams::symmetric(2, 3, 1.0, {1.0, 1.0}, 0.1, 1e-5);
  CHECK_NOTHROW(h.validate());
  auto bad = h;
  bad.alpha[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = h;
  bad.eta.second = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = h;
  bad.kappa[2] = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = h;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = h;
  bad.epsilon = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = h;
  bad.alpha.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("lambda table rows mirror incident-edge counts") {
  const auto g = make_graph(4, {{0, 1}, {1, 2}, {1, 3}});
  const std::vector<Triple> triples{{1, 0, 2}, {0, 1, 1}, {2, 1, 3}};
  const auto b = BehaviorData::from_triples(4, 2, triples);
  LambdaTable table(g, b);
  REQUIRE(table.rows() == b.num_entries());
  for (std::size_t id = 0; id < b.num_entries(); ++id)
    CHECK(table.row(id).size() == g.degree(b.node_of_entry(id)));
}

TEST_CASE("validate_state accepts a random valid state and flags corruption") {
  const auto g = make_graph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}});
  const std::vector<Triple> triples{{0, 0, 1}, {2, 1, 2}, {4, 2, 1}};
  const auto b = BehaviorData::from_triples(5, 3, triples);
  Rng rng(99);
  auto state = testing::random_state(g, b, 3, rng);
  CHECK_NOTHROW(validate_state(state, g, b));

  SUBCASE("broken simplex row") {
    auto s = state;
    s.phi_edge(0, 0) += 0.1;
    CHECK_THROWS_AS(validate_state(s, g, b), StateError);
  }
  SUBCASE("negative gamma") {
    auto s = state;
    s.gamma(2, 1) = -0.5;
    CHECK_THROWS_AS(validate_state(s, g, b), StateError);
  }
  SUBCASE("nonpositive tau") {
    auto s = state;
    s.tau(1, 0) = 0.0;
    CHECK_THROWS_AS(validate_state(s, g, b), StateError);
  }
  SUBCASE("topic-count mismatch between blocks") {
    auto s = state;
    Rng r2(7);
    auto other = testing::random_state(g, b, 2, r2);
    s.tau = other.tau;
    CHECK_THROWS_AS(validate_state(s, g, b), StateError);
  }
}
