#pragma once

#include "blinktrack/eval.hpp"
#include "blinktrack/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blinktrack {

// JSON config files. Every object is a partial override of the defaults;
// unknown keys and wrong types raise ConfigError naming the field path.

struct RunConfig {
  std::uint64_t seed = 1;
  std::optional<std::string> trace_path;  // either trace + truth ...
  std::optional<std::string> truth_path;
  std::optional<ScenarioConfig> scenario;  // ... or a scenario generated in memory
  std::optional<std::string> qtable_path;  // initial sarsa table
  std::string out_dir = "out";
  SamplerSpec sampler;
  EvalConfig eval;
};

struct SuiteConfig {
  std::vector<ScenarioConfig> scenarios;
  std::vector<SamplerSpec> samplers;
  CompareOptions options;
  std::optional<std::string> qtable_path;
  std::string out_dir = "out";
  EvalConfig eval;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const ScenarioConfig& c);

SamplerConfig sampler_config_from_json(const nlohmann::json& j, const std::string& path, SamplerConfig base = {});
nlohmann::json to_json(const SamplerConfig& c);

SamplerSpec sampler_spec_from_json(const nlohmann::json& j, const std::string& path, SamplerSpec base = {});
nlohmann::json to_json(const SamplerSpec& s);

EvalConfig eval_config_from_json(const nlohmann::json& j, const std::string& path, EvalConfig base = {});
nlohmann::json to_json(const EvalConfig& c);

// Relative paths inside a config file resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json to_json(const RunConfig& c);

SuiteConfig suite_config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json to_json(const SuiteConfig& c);

// Reads and parses a JSON file; IoError if unreadable, ConfigError if malformed.
nlohmann::json read_json_file(const std::string& path);

// FNV-1a 64 over the compact, key-sorted serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace blinktrack
