#pragma once

// Run configuration for the rumorverify command-line tool.
//
// A config file is a JSON document that may contain // and /* */ comments.
// Nested objects are flattened to dotted keys ({"train": {"lr": 1e-3}} sets
// "train.lr"); dotted keys may also be written directly. An optional
// top-level "grid" object maps keys to arrays of values and expands into one
// run per combination. Every key has a default, and unknown keys are
// rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rumor/evaluation.hpp"
#include "rumor/model.hpp"
#include "rumor/text_normalizer.hpp"
#include "rumor/thread.hpp"
#include "rumor/training.hpp"

namespace rumor::cli {

using nlohmann::json;

inline constexpr const char* kOutputDirEnv = "RUMORVERIFY_OUTPUT_DIR";

struct KeyInfo {
  std::string key;
  json default_value;
  std::string help;
};

// Every accepted key in documentation order.
const std::vector<KeyInfo>& config_keys();

class RunConfig {
 public:
  // All keys at their defaults.
  RunConfig();

  // Throws ConfigError for unknown keys and for values whose JSON type does
  // not match the key's default (integers are accepted for real-valued keys).
  void set(const std::string& key, const json& value);
  // "key=value": value is parsed as JSON when possible, else taken as a
  // string.
  void set_assignment(const std::string& assignment);

  const json& get(const std::string& key) const;
  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  // Nested object of all effective values.
  json to_json() const;

  // Resolved output directory: output_dir, else $RUMORVERIFY_OUTPUT_DIR,
  // else "runs".
  std::filesystem::path output_dir() const;

  ModelConfig model_config(std::size_t embedding_dim) const;
  TrainOptions train_options() const;
  NormalizationConfig normalization() const;
  LoadOptions load_options() const;
  std::vector<double> early_checkpoints() const;
  std::vector<PlatformPair> platform_pairs() const;
  std::vector<std::string> loeo_events() const;

 private:
  std::map<std::string, json> values_;
};

// Grid axes in file order; each value list is non-empty.
using Grid = std::vector<std::pair<std::string, std::vector<json>>>;

struct ConfigFile {
  RunConfig base;
  Grid grid;
};

// Parses a config file's text. Throws ConfigError on syntax errors, unknown
// keys or ill-typed values (grid values included).
ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::filesystem::path& path);

// Cartesian product of the grid axes applied on top of `base`, first axis
// slowest. An empty grid yields {base}. `overrides` ("key=value") are applied
// last, so flags win over both file values and grid values.
std::vector<RunConfig> expand_grid(const RunConfig& base, const Grid& grid,
                                   const std::vector<std::string>& overrides = {});

}  // namespace rumor::cli
