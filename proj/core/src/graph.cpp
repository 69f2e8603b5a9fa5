#include "clsm/graph.hpp"

#include <algorithm>
#include <string>

#include "clsm/errors.hpp"

namespace clsm {

Graph Graph::from_pairs(std::size_t num_nodes,
                        std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs) {
  Graph g;
  g.num_nodes_ = num_nodes;
  g.edges_.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    if (u == v) {
      throw DataError("graph: self-loop at node " + std::to_string(u));
    }
    if (u >= num_nodes || v >= num_nodes) {
      throw DataError("graph: node id out of range: " + std::to_string(std::max(u, v)) +
                      " >= " + std::to_string(num_nodes));
    }
    g.edges_.push_back({std::min(u, v), std::max(u, v)});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& x, const Edge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.offsets_.assign(num_nodes + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.a + 1];
    ++g.offsets_[e.b + 1];
  }
  for (std::size_t n = 0; n < num_nodes; ++n) g.offsets_[n + 1] += g.offsets_[n];

  g.adjacency_.resize(2 * g.edges_.size());
  g.incident_.resize(2 * g.edges_.size());
  g.ordinal_a_.resize(g.edges_.size());
  g.ordinal_b_.resize(g.edges_.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted, so filling in edge order leaves each neighbor list sorted:
  // node n first receives partners b > n in b order via e.a == n, but partners
  // a < n arrive earlier because those edges sort before. A second pass sorts
  // per node to be safe and keeps incident ids aligned.
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const Edge& ed = g.edges_[e];
    g.adjacency_[cursor[ed.a]] = ed.b;
    g.incident_[cursor[ed.a]] = static_cast<std::uint32_t>(e);
    ++cursor[ed.a];
    g.adjacency_[cursor[ed.b]] = ed.a;
    g.incident_[cursor[ed.b]] = static_cast<std::uint32_t>(e);
    ++cursor[ed.b];
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> scratch;
  for (std::size_t n = 0; n < num_nodes; ++n) {
    const std::size_t begin = g.offsets_[n];
    const std::size_t end = g.offsets_[n + 1];
    scratch.clear();
    for (std::size_t i = begin; i < end; ++i) {
      scratch.emplace_back(g.adjacency_[i], g.incident_[i]);
    }
    std::sort(scratch.begin(), scratch.end());
    for (std::size_t i = begin; i < end; ++i) {
      g.adjacency_[i] = scratch[i - begin].first;
      g.incident_[i] = scratch[i - begin].second;
      const std::uint32_t e = g.incident_[i];
      const std::uint32_t ord = static_cast<std::uint32_t>(i - begin);
      if (g.edges_[e].a == n) {
        g.ordinal_a_[e] = ord;
      } else {
        g.ordinal_b_[e] = ord;
      }
    }
  }
  return g;
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
  if (u == v) return false;
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::size_t Graph::edge_id(std::uint32_t u, std::uint32_t v) const {
  const auto nb = neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) {
    throw DataError("graph: no edge between " + std::to_string(u) + " and " + std::to_string(v));
  }
  return incident_edges(u)[static_cast<std::size_t>(it - nb.begin())];
}

}  // namespace clsm
