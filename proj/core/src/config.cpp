#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "clsm/errors.hpp"
#include "clsm/io.hpp"

namespace clsm {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(const std::string& key, std::string_view text) {
  double value = 0.0;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ConfigError(key + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& key, std::string_view text) {
  std::uint64_t value = 0;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + std::string(text) + "'");
}

std::vector<double> parse_double_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string_view piece =
        trim(comma == std::string_view::npos ? text.substr(start)
                                             : text.substr(start, comma - start));
    out.push_back(parse_double(key, piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Wraps a parsed key=value map with presence tracking so unknown keys can be
// diagnosed after every reader has claimed its keys.
class KeyReader {
 public:
  explicit KeyReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  const std::string* find(const std::string& key) {
    seen_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }

  double number(const std::string& key, double fallback) {
    const std::string* raw = find(key);
    return raw ? parse_double(key, *raw) : fallback;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const std::string* raw = find(key);
    return raw ? parse_u64(key, *raw) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const std::string* raw = find(key);
    return raw ? parse_bool(key, *raw) : fallback;
  }

  void reject_unclaimed() const {
    for (const auto& [key, value] : kv_) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const std::map<std::string, std::string>& kv_;
  std::set<std::string> seen_;
};

// alpha may come as a list ("alpha = 0.3,0.3"), a per-component scalar, or a
// total precision spread evenly over K topics.
std::vector<double> resolve_alpha(KeyReader& keys, std::uint64_t num_topics_hint) {
  const std::string* alpha_raw = keys.find("alpha");
  const std::string* precision_raw = keys.find("alpha_precision");
  if (alpha_raw && precision_raw) {
    throw ConfigError("give either alpha or alpha_precision, not both");
  }
  if (alpha_raw) {
    const std::vector<double> values = parse_double_list("alpha", *alpha_raw);
    if (values.size() > 1) {
      if (num_topics_hint != 0 && num_topics_hint != values.size()) {
        throw ConfigError("alpha list length disagrees with num_topics");
      }
      return values;
    }
    if (num_topics_hint == 0) throw ConfigError("scalar alpha needs num_topics");
    return std::vector<double>(num_topics_hint, values[0]);
  }
  if (num_topics_hint == 0) throw ConfigError("alpha list or num_topics required");
  const double precision = precision_raw ? parse_double("alpha_precision", *precision_raw) : 1.0;
  return std::vector<double>(num_topics_hint, precision / static_cast<double>(num_topics_hint));
}

std::vector<double> resolve_kappa(KeyReader& keys, std::uint64_t vocab_hint) {
  const std::string* kappa_raw = keys.find("kappa");
  if (kappa_raw) {
    const std::vector<double> values = parse_double_list("kappa", *kappa_raw);
    if (values.size() > 1) {
      if (vocab_hint != 0 && vocab_hint != values.size()) {
        throw ConfigError("kappa list length disagrees with vocab_size");
      }
      return values;
    }
    if (vocab_hint == 0) throw ConfigError("scalar kappa needs vocab_size");
    return std::vector<double>(vocab_hint, values[0]);
  }
  if (vocab_hint == 0) throw ConfigError("kappa list or vocab_size required");
  return std::vector<double>(vocab_hint, 0.1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& name) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    const std::size_t hash = view.find('#');
    if (hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(name + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key{trim(view.substr(0, eq))};
    const std::string value{trim(view.substr(eq + 1))};
    if (key.empty()) {
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError(name + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return parse_config_text(in, path.string());
}

SimConfig sim_config_from_map(const std::map<std::string, std::string>& kv) {
  KeyReader keys(kv);
  SimConfig config;
  config.num_nodes = keys.integer("num_nodes", 0);
  if (config.num_nodes == 0) throw ConfigError("num_nodes required and positive");
  const std::uint64_t num_topics = keys.integer("num_topics", 0);
  const std::uint64_t vocab_size = keys.integer("vocab_size", 0);
  config.hyper.alpha = resolve_alpha(keys, num_topics);
  config.hyper.kappa = resolve_kappa(keys, vocab_size);
  config.hyper.eta = {keys.number("eta1", 1.0), keys.number("eta0", 1.0)};
  config.hyper.epsilon = keys.number("epsilon", 1e-5);
  config.selections_mean = keys.number("selections_mean", 10.0);
  config.seed = keys.integer("seed", 0);
  config.retain_link_indicators_only = keys.boolean("retain_link_indicators_only", true);
  keys.reject_unclaimed();
  config.hyper.validate();
  if (config.selections_mean < 0.0) throw ConfigError("selections_mean must be >= 0");
  return config;
}

FitConfig fit_config_from_map(const std::map<std::string, std::string>& kv) {
  KeyReader keys(kv);
  FitConfig config;
  config.num_topics = keys.integer("num_topics", config.num_topics);
  config.max_iterations = keys.integer("max_iterations", config.max_iterations);
  config.rel_tol = keys.number("rel_tol", config.rel_tol);
  config.alpha_precision = keys.number("alpha_precision", config.alpha_precision);
  config.eta = {keys.number("eta1", config.eta.first), keys.number("eta0", config.eta.second)};
  config.kappa_value = keys.number("kappa_value", config.kappa_value);
  config.epsilon = keys.number("epsilon", config.epsilon);
  if (const std::string* mode = keys.find("omega_mode")) {
    if (*mode == "rho") {
      config.omega_mode = FitConfig::OmegaMode::kVariationalRho;
    } else if (*mode == "direct") {
      config.omega_mode = FitConfig::OmegaMode::kDirectWithSmoothing;
    } else {
      throw ConfigError("omega_mode: expected 'rho' or 'direct', got '" + *mode + "'");
    }
  }
  config.smoothing_pseudocount = keys.number("smoothing_pseudocount", config.smoothing_pseudocount);
  config.seed = keys.integer("seed", config.seed);
  config.threads = keys.integer("threads", config.threads);
  config.num_restarts = keys.integer("num_restarts", config.num_restarts);
  config.init_jitter = keys.number("init_jitter", config.init_jitter);
  keys.reject_unclaimed();
  config.validate();
  return config;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return sim_config_from_map(load_config_file(path));
}

FitConfig load_fit_config(const std::filesystem::path& path) {
  return fit_config_from_map(load_config_file(path));
}

}  // namespace clsm
