#include "clsm/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "clsm/errors.hpp"

namespace clsm {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::uint32_t parse_u32_token(std::string_view token, const std::string& name, std::size_t line) {
  std::uint32_t value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    throw FormatError(name + ":" + std::to_string(line) + ": expected a non-negative integer, got '" +
                      std::string(token) + "'");
  }
  return value;
}

// Splits a data line on single tabs. Returns false for lines the parsers
// skip: blank lines and comments. Header comments "#nodes=" / "#vocab=" are
// surfaced through the out-parameters instead.
bool split_data_line(std::string_view line, const std::string& name, std::size_t line_no,
                     std::vector<std::string_view>& fields,
                     std::optional<std::uint32_t>* header_nodes,
                     std::optional<std::uint32_t>* header_vocab) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const std::string_view body = trim(line);
  if (body.empty()) return false;
  if (body.front() == '#') {
    for (const auto& [prefix, slot] :
         {std::pair{std::string_view{"#nodes="}, header_nodes},
          std::pair{std::string_view{"#vocab="}, header_vocab}}) {
      if (slot != nullptr && body.starts_with(prefix)) {
        *slot = parse_u32_token(body.substr(prefix.size()), name, line_no);
      }
    }
    return false;
  }
  fields.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return true;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

Graph read_edge_list(std::istream& in, const std::string& name) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<std::size_t> lines;
  std::optional<std::uint32_t> header_nodes;
  std::uint64_t max_id = 0;
  bool any = false;

  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_data_line(line, name, line_no, fields, &header_nodes, nullptr)) continue;
    if (fields.size() != 2) {
      throw FormatError(name + ":" + std::to_string(line_no) +
                        ": expected 'u<TAB>v', got " + std::to_string(fields.size()) + " fields");
    }
    const std::uint32_t u = parse_u32_token(trim(fields[0]), name, line_no);
    const std::uint32_t v = parse_u32_token(trim(fields[1]), name, line_no);
    if (u == v) {
      throw DataError(name + ":" + std::to_string(line_no) + ": self-loop on node " +
                      std::to_string(u));
    }
    pairs.emplace_back(u, v);
    lines.push_back(line_no);
    max_id = std::max<std::uint64_t>(max_id, std::max(u, v));
    any = true;
  }
  const std::uint64_t num_nodes = header_nodes ? *header_nodes : (any ? max_id + 1 : 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first >= num_nodes || pairs[i].second >= num_nodes) {
      throw DataError(name + ":" + std::to_string(lines[i]) + ": node id exceeds declared count " +
                      std::to_string(num_nodes));
    }
  }
  return Graph::from_pairs(num_nodes, pairs);
}

Graph load_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_edge_list(in, path.string());
}

void write_edge_list(const Graph& graph, std::ostream& out) {
  out << "#nodes=" << graph.num_nodes() << "\n";
  for (const auto& e : graph.edges()) out << e.a << "\t" << e.b << "\n";
}

void write_edge_list(const Graph& graph, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_edge_list(graph, out);
  if (!out) throw IoError("failed writing " + path.string());
}

BehaviorData read_behaviors(std::istream& in, const std::string& name,
                            std::optional<std::uint32_t> vocab_size_hint,
                            std::optional<std::uint32_t> num_nodes_hint) {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triples;
  std::vector<std::size_t> lines;
  std::optional<std::uint32_t> header_nodes;
  std::optional<std::uint32_t> header_vocab;
  std::uint64_t max_node = 0;
  std::uint64_t max_token = 0;
  bool any = false;

  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_data_line(line, name, line_no, fields, &header_nodes, &header_vocab)) continue;
    if (fields.size() != 2 && fields.size() != 3) {
      throw FormatError(name + ":" + std::to_string(line_no) +
                        ": expected 'node<TAB>token[<TAB>count]', got " +
                        std::to_string(fields.size()) + " fields");
    }
    const std::uint32_t node = parse_u32_token(trim(fields[0]), name, line_no);
    const std::uint32_t token = parse_u32_token(trim(fields[1]), name, line_no);
    std::uint32_t count = 1;
    if (fields.size() == 3) {
      const std::string_view raw = trim(fields[2]);
      if (!raw.empty() && raw.front() == '-') {
        throw DataError(name + ":" + std::to_string(line_no) + ": negative count");
      }
      count = parse_u32_token(raw, name, line_no);
      if (count == 0) {
        throw DataError(name + ":" + std::to_string(line_no) + ": zero count");
      }
    }
    triples.emplace_back(node, token, count);
    lines.push_back(line_no);
    max_node = std::max<std::uint64_t>(max_node, node);
    max_token = std::max<std::uint64_t>(max_token, token);
    any = true;
  }
  const std::uint64_t num_nodes =
      num_nodes_hint ? *num_nodes_hint
                     : (header_nodes ? *header_nodes : (any ? max_node + 1 : 0));
  const std::uint64_t vocab =
      vocab_size_hint ? *vocab_size_hint
                      : (header_vocab ? *header_vocab : (any ? max_token + 1 : 0));
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& [node, token, count] = triples[i];
    if (node >= num_nodes) {
      throw DataError(name + ":" + std::to_string(lines[i]) + ": node id exceeds declared count " +
                      std::to_string(num_nodes));
    }
    if (token >= vocab) {
      throw DataError(name + ":" + std::to_string(lines[i]) +
                      ": token id exceeds vocabulary size " + std::to_string(vocab));
    }
  }
  return BehaviorData::from_triples(num_nodes, vocab, triples);
}

BehaviorData load_behaviors(const std::filesystem::path& path,
                            std::optional<std::uint32_t> vocab_size_hint,
                            std::optional<std::uint32_t> num_nodes_hint) {
  auto in = open_input(path);
  return read_behaviors(in, path.string(), vocab_size_hint, num_nodes_hint);
}

void write_behaviors(const BehaviorData& behaviors, std::ostream& out) {
  out << "#nodes=" << behaviors.num_nodes() << "\n";
  out << "#vocab=" << behaviors.vocab_size() << "\n";
  for (std::uint32_t n = 0; n < behaviors.num_nodes(); ++n) {
    for (const auto& entry : behaviors.entries(n)) {
      out << n << "\t" << entry.token << "\t" << entry.count << "\n";
    }
  }
}

void write_behaviors(const BehaviorData& behaviors, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_behaviors(behaviors, out);
  if (!out) throw IoError("failed writing " + path.string());
}

DatasetBundle load_dataset(const std::filesystem::path& edges_path,
                           const std::filesystem::path& behaviors_path,
                           std::optional<std::uint32_t> vocab_size_hint) {
  DatasetBundle bundle;
  bundle.graph = load_edge_list(edges_path);
  bundle.behaviors =
      load_behaviors(behaviors_path, vocab_size_hint,
                     static_cast<std::uint32_t>(bundle.graph.num_nodes()));
  return bundle;
}

namespace {

constexpr char kMagic[8] = {'C', 'L', 'S', 'M', '1', 0, 0, 0};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(buf, bits);
}

class Cursor {
 public:
  Cursor(std::string_view bytes, std::size_t at) : bytes_(bytes), at_(at) {}

  std::uint64_t take_u64() {
    if (at_ + 8 > bytes_.size()) throw CorruptError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[at_ + i])) << (8 * i);
    }
    at_ += 8;
    return v;
  }

  double take_f64() {
    const std::uint64_t bits = take_u64();
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  }

  void take_f64_block(double* out, std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) out[i] = take_f64();
  }

  std::size_t at() const { return at_; }

 private:
  std::string_view bytes_;
  std::size_t at_;
};

// a*b with an overflow guard; dimensions in a checkpoint header are
// untrusted until this passes.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
    throw CorruptError("checkpoint dimensions overflow");
  }
  return a * b;
}

}  // namespace

void save_checkpoint(const FittedModel& model, std::ostream& out) {
  const std::uint64_t n = model.theta_hat.rows();
  const std::uint64_t k = model.hyper.num_topics();
  const std::uint64_t v = model.hyper.vocab_size();
  if (model.theta_hat.cols() != k || model.beta_hat.size() != k ||
      model.omega_hat.rows() != k || model.omega_hat.cols() != v) {
    throw StateError("checkpoint: model dimensions disagree");
  }
  std::string buf;
  buf.append(kMagic, sizeof kMagic);
  put_u64(buf, n);
  put_u64(buf, k);
  put_u64(buf, v);
  put_u64(buf, model.iterations);
  put_u64(buf, model.elbo_trace.size());
  put_f64(buf, model.hyper.eta.first);
  put_f64(buf, model.hyper.eta.second);
  put_f64(buf, model.hyper.epsilon);
  for (double a : model.hyper.alpha) put_f64(buf, a);
  for (double c : model.hyper.kappa) put_f64(buf, c);
  for (std::size_t i = 0; i < model.theta_hat.rows() * model.theta_hat.cols(); ++i) {
    put_f64(buf, model.theta_hat.data()[i]);
  }
  for (double b : model.beta_hat) put_f64(buf, b);
  for (std::size_t i = 0; i < model.omega_hat.rows() * model.omega_hat.cols(); ++i) {
    put_f64(buf, model.omega_hat.data()[i]);
  }
  for (double e : model.elbo_trace) put_f64(buf, e);
  put_u64(buf, fnv1a(buf));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing checkpoint stream");
}

void save_checkpoint(const FittedModel& model, const std::filesystem::path& path) {
  auto out = open_output(path);
  save_checkpoint(model, out);
}

FittedModel load_checkpoint(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kMagic) throw CorruptError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a model checkpoint (bad magic)");
  }
  if (bytes.size() < sizeof kMagic + 8) throw CorruptError("checkpoint truncated");
  const std::string_view payload(bytes.data(), bytes.size() - 8);
  Cursor check(bytes, bytes.size() - 8);
  if (check.take_u64() != fnv1a(payload)) throw CorruptError("checkpoint checksum mismatch");

  Cursor cur(payload, sizeof kMagic);
  const std::uint64_t n = cur.take_u64();
  const std::uint64_t k = cur.take_u64();
  const std::uint64_t v = cur.take_u64();
  const std::uint64_t iterations = cur.take_u64();
  const std::uint64_t trace_len = cur.take_u64();
  std::uint64_t doubles = 3;
  doubles += k;
  doubles += v;
  doubles += checked_mul(n, k);
  doubles += k;
  doubles += checked_mul(k, v);
  doubles += trace_len;
  const std::uint64_t expected = sizeof kMagic + 8 * 5 + checked_mul(doubles, 8) + 8;
  if (expected != bytes.size()) throw CorruptError("checkpoint size disagrees with header");

  FittedModel model;
  model.iterations = iterations;
  model.hyper.eta.first = cur.take_f64();
  model.hyper.eta.second = cur.take_f64();
  model.hyper.epsilon = cur.take_f64();
  model.hyper.alpha.resize(k);
  cur.take_f64_block(model.hyper.alpha.data(), k);
  model.hyper.kappa.resize(v);
  cur.take_f64_block(model.hyper.kappa.data(), v);
  model.theta_hat = Matrix(n, k);
  cur.take_f64_block(model.theta_hat.data(), n * k);
  model.beta_hat.resize(k);
  cur.take_f64_block(model.beta_hat.data(), k);
  model.omega_hat = Matrix(k, v);
  cur.take_f64_block(model.omega_hat.data(), k * v);
  model.elbo_trace.resize(trace_len);
  cur.take_f64_block(model.elbo_trace.data(), trace_len);
  return model;
}

FittedModel load_checkpoint(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_checkpoint(in);
}

namespace {

void append_csv_field(std::string& out, std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string metrics_csv_string(std::span<const MetricsRow> rows) {
  std::string out = "dataset,task,model,K,fold,repeat,metric,value\n";
  char value_buf[64];
  for (const auto& row : rows) {
    append_csv_field(out, row.dataset);
    out.push_back(',');
    append_csv_field(out, row.task);
    out.push_back(',');
    append_csv_field(out, row.model);
    out.push_back(',');
    out.append(std::to_string(row.k));
    out.push_back(',');
    out.append(std::to_string(row.fold));
    out.push_back(',');
    out.append(std::to_string(row.repeat));
    out.push_back(',');
    append_csv_field(out, row.metric);
    out.push_back(',');
    std::snprintf(value_buf, sizeof value_buf, "%.6g", row.value);
    out.append(value_buf);
    out.push_back('\n');
  }
  return out;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  auto out = open_output(path);
  const std::string text = metrics_csv_string(rows);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace clsm
