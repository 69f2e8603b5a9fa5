#pragma once

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace clsm {

// Per-node multisets of observed tokens, stored as aggregated (token, count)
// entries in one CSR layout. Duplicate occurrences of a token within a node
// collapse into a single entry; every per-selection computation in the model
// depends only on the token, so the count acts as an exact multiplicity weight.
class BehaviorData {
 public:
  struct Entry {
    std::uint32_t token;
    std::uint32_t count;  // >= 1
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  BehaviorData() = default;

  // Aggregates duplicate (node, token) triples by summing counts. Throws
  // DataError on out-of-range nodes/tokens or zero counts.
  static BehaviorData from_triples(
      std::size_t num_nodes, std::size_t vocab_size,
      std::span<const std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t vocab_size() const { return vocab_size_; }

  std::span<const Entry> entries(std::uint32_t n) const {
    return {entries_.data() + offsets_[n], offsets_[n + 1] - offsets_[n]};
  }
  // Total selection count M_n for node n (sum of entry counts).
  std::uint64_t total(std::uint32_t n) const { return totals_[n]; }
  std::uint64_t total_selections() const;

  std::size_t num_entries() const { return entries_.size(); }
  const Entry& entry(std::size_t id) const { return entries_[id]; }
  std::uint32_t node_of_entry(std::size_t id) const { return entry_node_[id]; }
  // Global entry id range [first, last) for node n.
  std::pair<std::size_t, std::size_t> entry_range(std::uint32_t n) const {
    return {offsets_[n], offsets_[n + 1]};
  }

  friend bool operator==(const BehaviorData&, const BehaviorData&) = default;

 private:
  std::size_t vocab_size_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> offsets_;      // N+1
  std::vector<std::uint64_t> totals_;     // N
  std::vector<std::uint32_t> entry_node_;  // owner node per entry
};

}  // namespace clsm
