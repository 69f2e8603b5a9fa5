#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace clsm {

// Undirected simple graph over nodes [0, N). Edges carry stable ids (their
// index in the sorted edge array); each node exposes a sorted neighbor list
// and, aligned with it, the ids of the incident edges. Inference addresses
// per-edge parameters by (node, incident-edge ordinal) through that alignment.
class Graph {
 public:
  struct Edge {
    std::uint32_t a;  // a < b
    std::uint32_t b;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  Graph() = default;

  // Canonicalizes (min, max), sorts, drops duplicates. Throws DataError on
  // self-loops or node ids outside [0, num_nodes).
  static Graph from_pairs(std::size_t num_nodes,
                          std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }

  std::size_t degree(std::uint32_t n) const { return offsets_[n + 1] - offsets_[n]; }
  std::span<const std::uint32_t> neighbors(std::uint32_t n) const {
    return {adjacency_.data() + offsets_[n], degree(n)};
  }
  std::span<const std::uint32_t> incident_edges(std::uint32_t n) const {
    return {incident_.data() + offsets_[n], degree(n)};
  }

  bool has_edge(std::uint32_t u, std::uint32_t v) const;
  // Id of edge {u, v}; throws DataError if absent.
  std::size_t edge_id(std::uint32_t u, std::uint32_t v) const;

  // Ordinal of edge e within endpoint n's incident list.
  std::uint32_t incident_ordinal(std::size_t e, std::uint32_t n) const {
    return edges_[e].a == n ? ordinal_a_[e] : ordinal_b_[e];
  }

  std::uint64_t num_pairs() const {
    const std::uint64_t n = num_nodes_;
    return n * (n - 1) / 2;
  }
  std::uint64_t num_nonlink_pairs() const { return num_pairs() - num_edges(); }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;      // N+1
  std::vector<std::uint32_t> adjacency_;  // 2|E|, sorted per node
  std::vector<std::uint32_t> incident_;   // 2|E|, edge ids aligned with adjacency_
  std::vector<std::uint32_t> ordinal_a_;  // |E|, ordinal of e in a's incident list
  std::vector<std::uint32_t> ordinal_b_;
};

}  // namespace clsm
