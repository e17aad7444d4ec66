#pragma once

#include <cstdint>
#include <string>

#include "multirag/confidence.hpp"

namespace multirag {

// Full engine configuration. File format: flat `key = value` lines, '#'
// comments; unknown keys are rejected. Precedence is CLI flag over config
// file over the defaults below.
struct EngineConfig {
  ConfidenceConfig confidence;

  double history_init_h = 50.0;
  double history_default_prior = 0.5;

  std::size_t chunk_size = 512;
  std::size_t chunk_overlap = 64;

  std::size_t min_members = 2;
  std::size_t min_sources = 2;
  std::size_t promote_min_sources = 2;
  std::size_t degree_cap = 10000;
  std::size_t subgraph_hops = 1;
  bool standardize = true;

  std::string client_mode = "mock";  // mock | live
  std::string endpoint;              // live mode: http(s)://host[:port]/path
  std::string model;
  std::string api_key_env = "MULTIRAG_API_KEY";
  std::uint64_t request_budget = 0;  // 0 = unlimited

  std::string mock_fixtures;  // mock mode: fixture JSON path
  std::string prompts_dir;
  std::string history_path;
  std::string entity_alias_path;
  std::string predicate_alias_path;

  std::uint64_t seed = 42;
  std::size_t workers = 0;  // 0 = hardware concurrency

  // Rejects inconsistent combinations (mock without fixtures, live without
  // an endpoint).
  void validate() const;
};

// Applies one `key = value` assignment; unknown keys or unparsable values
// raise ConfigError.
void apply_config_entry(EngineConfig& cfg, std::string_view key,
                        std::string_view value);

EngineConfig load_config(const std::string& path);

}  // namespace multirag
