#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clsm/behavior.hpp"
#include "clsm/generative.hpp"
#include "clsm/graph.hpp"
#include "clsm/inference.hpp"
#include "clsm/state.hpp"

namespace clsm {

// Graph plus behaviors loaded together, with optional display labels.
struct DatasetBundle {
  Graph graph;
  BehaviorData behaviors;
  std::vector<std::string> node_labels;   // empty or size N
  std::vector<std::string> token_labels;  // empty or size V
};

// Tab-separated "u<TAB>v" per edge. Blank lines and '#' comments are skipped;
// a "#nodes=N" header fixes the node count (otherwise 1 + max id). Duplicate
// pairs in either orientation collapse. Malformed lines raise FormatError
// with the line number; self-loops and out-of-range ids raise DataError.
Graph load_edge_list(const std::filesystem::path& path);
Graph read_edge_list(std::istream& in, const std::string& name);
void write_edge_list(const Graph& graph, const std::filesystem::path& path);
void write_edge_list(const Graph& graph, std::ostream& out);

// Tab-separated "node<TAB>token<TAB>count"; the count column may be omitted
// and defaults to 1. Repeated (node, token) lines sum. "#nodes=" / "#vocab="
// headers fix dimensions; explicit hints take precedence over headers, and
// both beat the 1 + max-id fallback. Ids at or past a fixed dimension raise
// DataError; malformed lines raise FormatError with the line number.
BehaviorData load_behaviors(const std::filesystem::path& path,
                            std::optional<std::uint32_t> vocab_size_hint = {},
                            std::optional<std::uint32_t> num_nodes_hint = {});
BehaviorData read_behaviors(std::istream& in, const std::string& name,
                            std::optional<std::uint32_t> vocab_size_hint = {},
                            std::optional<std::uint32_t> num_nodes_hint = {});
void write_behaviors(const BehaviorData& behaviors, const std::filesystem::path& path);
void write_behaviors(const BehaviorData& behaviors, std::ostream& out);

// Edge list plus behavior file with consistent dimensions (behavior node ids
// must fit the graph).
DatasetBundle load_dataset(const std::filesystem::path& edges_path,
                           const std::filesystem::path& behaviors_path,
                           std::optional<std::uint32_t> vocab_size_hint = {});

// Binary model container: magic "CLSM1", little-endian u64 dimensions, f64
// payload, trailing FNV-1a checksum. load(save(m)) reproduces every field
// bit-exactly. Wrong magic raises FormatError; any truncation, trailing
// garbage, or checksum mismatch raises CorruptError.
void save_checkpoint(const FittedModel& model, const std::filesystem::path& path);
void save_checkpoint(const FittedModel& model, std::ostream& out);
FittedModel load_checkpoint(const std::filesystem::path& path);
FittedModel load_checkpoint(std::istream& in);

// One metric observation from an evaluation run.
struct MetricsRow {
  std::string dataset;
  std::string task;
  std::string model;
  std::uint32_t k = 0;
  std::uint32_t fold = 0;
  std::uint32_t repeat = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

// CSV with the fixed header "dataset,task,model,K,fold,repeat,metric,value";
// values use 6 significant digits; string fields are quoted when they contain
// commas, quotes, or newlines.
void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::string metrics_csv_string(std::span<const MetricsRow> rows);

// Flat "key = value" config text; '#' starts a comment, blank lines are
// skipped. Duplicate keys raise ConfigError.
std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& name);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

// Strict readers: unknown keys raise ConfigError, as do malformed numbers.
// sim configs require num_nodes, num_topics (or an alpha list), and
// vocab_size (or a kappa list); alpha may be given as a list, a per-component
// scalar, or alpha_precision.
SimConfig sim_config_from_map(const std::map<std::string, std::string>& kv);
FitConfig fit_config_from_map(const std::map<std::string, std::string>& kv);
SimConfig load_sim_config(const std::filesystem::path& path);
FitConfig load_fit_config(const std::filesystem::path& path);

}  // namespace clsm
