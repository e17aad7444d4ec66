#include "multirag/config.hpp"

#include <charconv>
#include <fstream>

namespace multirag {

namespace {

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    raise(Errc::config_error,
          "key '" + std::string(key) + "' needs a number, got '" +
              std::string(value) + "'");
  return out;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    raise(Errc::config_error,
          "key '" + std::string(key) + "' needs a non-negative integer, got '" +
              std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  raise(Errc::config_error,
        "key '" + std::string(key) + "' needs true/false, got '" +
            std::string(value) + "'");
}

}  // namespace

void apply_config_entry(EngineConfig& cfg, std::string_view key,
                        std::string_view value) {
  const std::string k(trim_view(key));
  const std::string v(trim_view(value));

  if (k == "alpha") {
    cfg.confidence.alpha = parse_double(k, v);
    if (cfg.confidence.alpha < 0.0 || cfg.confidence.alpha > 1.0)
      raise(Errc::config_error, "alpha must lie in [0,1]");
  } else if (k == "beta") {
    cfg.confidence.beta = parse_double(k, v);
    if (cfg.confidence.beta <= 0.0)
      raise(Errc::config_error, "beta must be positive");
  } else if (k == "node_threshold") {
    cfg.confidence.node_threshold = parse_double(k, v);
  } else if (k == "graph_threshold") {
    cfg.confidence.graph_threshold = parse_double(k, v);
  } else if (k == "top_k") {
    cfg.confidence.top_k = parse_unsigned(k, v);
  } else if (k == "similarity_mode") {
    cfg.confidence.similarity_mode = similarity_mode_from_string(v);
  } else if (k == "smoothing") {
    if (v != "add_one")
      raise(Errc::config_error, "only add_one smoothing is available");
  } else if (k == "history_init_h") {
    cfg.history_init_h = parse_double(k, v);
    if (cfg.history_init_h < 0.0)
      raise(Errc::config_error, "history_init_h must be >= 0");
  } else if (k == "history_default_prior") {
    cfg.history_default_prior = parse_double(k, v);
    if (cfg.history_default_prior < 0.0 || cfg.history_default_prior > 1.0)
      raise(Errc::config_error, "history_default_prior must lie in [0,1]");
  } else if (k == "chunk_size") {
    cfg.chunk_size = parse_unsigned(k, v);
    if (cfg.chunk_size == 0)
      raise(Errc::config_error, "chunk_size must be positive");
  } else if (k == "chunk_overlap") {
    cfg.chunk_overlap = parse_unsigned(k, v);
  } else if (k == "min_members") {
    cfg.min_members = parse_unsigned(k, v);
  } else if (k == "min_sources") {
    cfg.min_sources = parse_unsigned(k, v);
  } else if (k == "promote_min_sources") {
    cfg.promote_min_sources = parse_unsigned(k, v);
  } else if (k == "degree_cap") {
    cfg.degree_cap = parse_unsigned(k, v);
  } else if (k == "subgraph_hops") {
    cfg.subgraph_hops = parse_unsigned(k, v);
  } else if (k == "standardize") {
    cfg.standardize = parse_bool(k, v);
  } else if (k == "client_mode") {
    if (v != "mock" && v != "live")
      raise(Errc::config_error, "client_mode must be mock or live");
    cfg.client_mode = v;
  } else if (k == "endpoint") {
    cfg.endpoint = v;
  } else if (k == "model") {
    cfg.model = v;
  } else if (k == "api_key_env") {
    cfg.api_key_env = v;
  } else if (k == "request_budget") {
    cfg.request_budget = parse_unsigned(k, v);
  } else if (k == "mock_fixtures") {
    cfg.mock_fixtures = v;
  } else if (k == "prompts_dir") {
    cfg.prompts_dir = v;
  } else if (k == "history_path") {
    cfg.history_path = v;
  } else if (k == "entity_alias_path") {
    cfg.entity_alias_path = v;
  } else if (k == "predicate_alias_path") {
    cfg.predicate_alias_path = v;
  } else if (k == "seed") {
    cfg.seed = parse_unsigned(k, v);
  } else if (k == "workers") {
    cfg.workers = parse_unsigned(k, v);
  } else {
    raise(Errc::config_error, "unknown config key '" + k + "'");
  }
}

EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open config file " + path);

  EngineConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim_view(line);
    if (view.empty() || view.front() == '#') continue;
    std::size_t eq = view.find('=');
    if (eq == std::string_view::npos)
      raise(Errc::config_error,
            path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_entry(cfg, view.substr(0, eq), view.substr(eq + 1));
  }
  return cfg;
}

void EngineConfig::validate() const {
  if (client_mode == "mock" && mock_fixtures.empty())
    raise(Errc::config_error, "mock client mode requires mock_fixtures");
  if (client_mode == "live" && endpoint.empty())
    raise(Errc::config_error, "live client mode requires an endpoint");
  if (chunk_overlap >= chunk_size)
    raise(Errc::config_error, "chunk_overlap must be smaller than chunk_size");
}

}  // namespace multirag
