#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "rumor/error.hpp"

namespace rumor::cli {
namespace {

json default_pairs() {
  json pairs = json::array();
  for (const auto& [train, test] : kDefaultPlatformPairs) pairs.push_back({train, test});
  return pairs;
}

std::vector<KeyInfo> build_keys() {
  const ModelConfig model;
  const nn::TrainConfig train;
  const nn::LossConfig loss;
  const NormalizationConfig text;
  return {
      {"data.train", "", "training split (normalized thread file)"},
      {"data.dev", "", "development split used for model selection"},
      {"data.test", "", "test split"},
      {"data.missing_stance", "reject", "reply without a stance label: reject | comment"},
      {"embeddings.path", "", "embedding file; empty means none"},
      {"embeddings.fallback", false, "hash-embed posts the embedding file lacks (or all posts if no file)"},
      {"embeddings.hash_dim", 64, "dimension of the hash embedder when no embedding file is given"},
      {"text.url_token", text.url_token, "replacement for URLs"},
      {"text.mention_token", text.mention_token, "replacement for @-mentions"},
      {"text.emoji_table", "", "emoji description table (JSON lines); empty means built-in"},
      {"text.segment_hashtags", text.segment_hashtags, "split #CamelCase hashtags into words"},
      {"model.hidden_semantic", model.hidden_semantic, "hidden size of the semantic block"},
      {"model.hidden_final", model.hidden_final, "hidden size of the final block"},
      {"model.d_model", model.d_model, "covariate attention width"},
      {"model.heads", model.heads, "attention heads (must divide d_model)"},
      {"model.depth_levels", model.depth_levels, "depth one-hot size; deeper replies share the last level"},
      {"model.covariate_attention", std::string(attention_mode_name(model.attention)),
       "covariate attention input: tokens | single"},
      {"model.stance_injection", model.stance_injection, "append one-hot stances to post vectors"},
      {"model.stance_distribution", model.stance_distribution, "feed the reply stance distribution"},
      {"model.depth_encoding", model.depth_encoding, "feed per-stance averaged depth encodings"},
      {"model.structural_covariates", model.structural_covariates, "use the covariate attention branch"},
      {"train.lr", train.learning_rate, "Adam learning rate"},
      {"train.weight_decay", train.weight_decay, "decoupled weight decay"},
      {"train.clip", train.clip_norm, "global gradient-norm clip; 0 disables"},
      {"train.batch_size", train.batch_size, "threads per batch"},
      {"train.epochs", train.epochs, "training epochs"},
      {"train.dropout", train.dropout, "dropout probability"},
      {"seed", train.seed, "seed for initialization, shuffling and dropout"},
      {"loss.gamma", loss.gamma, "focal loss focusing parameter"},
      {"loss.reduction", "mean", "batch reduction: mean | sum"},
      {"loss.class_weights", "inverse_frequency", "inverse_frequency | none"},
      {"eval.checkpoints", kDefaultEarlyCheckpoints, "early-detection checkpoints in hours"},
      {"eval.pairs", default_pairs(), "cross-platform [train, test] platform pairs"},
      {"eval.events", json::array(), "leave-one-event-out folds to run; empty means every event"},
      {"eval.dev_fraction", 0.1, "share of a fold's training threads held out for model selection"},
      {"output_dir", "", "output directory; empty means $RUMORVERIFY_OUTPUT_DIR, else ./runs"},
  };
}

void flatten(const json& obj, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else {
      out.emplace_back(key, *it);
    }
  }
}

bool type_matches(const json& expected, const json& value) {
  if (expected.is_boolean()) return value.is_boolean();
  if (expected.is_string()) return value.is_string();
  if (expected.is_array()) return value.is_array();
  if (expected.is_number_float()) return value.is_number();
  if (expected.is_number_unsigned() || expected.is_number_integer()) {
    return value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
  }
  return false;
}

const char* type_name(const json& expected) {
  if (expected.is_boolean()) return "a boolean";
  if (expected.is_string()) return "a string";
  if (expected.is_array()) return "an array";
  if (expected.is_number_float()) return "a number";
  return "a non-negative integer";
}

}  // namespace

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = build_keys();
  return keys;
}

RunConfig::RunConfig() {
  for (const KeyInfo& k : config_keys()) values_[k.key] = k.default_value;
}

void RunConfig::set(const std::string& key, const json& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  if (!type_matches(it->second, value)) {
    throw ConfigError("config key '" + key + "' must be " + type_name(it->second) + ", got " + value.dump());
  }
  // Keep real-valued keys real so the echo and later type checks stay stable.
  it->second = it->second.is_number_float() ? json(value.get<double>()) : value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (values_.contains(key) && values_.at(key).is_string() && !value.is_string()) value = text;
  set(key, value);
}

const json& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::str(const std::string& key) const { return get(key).get<std::string>(); }
double RunConfig::real(const std::string& key) const { return get(key).get<double>(); }
std::uint64_t RunConfig::integer(const std::string& key) const { return get(key).get<std::uint64_t>(); }
bool RunConfig::flag(const std::string& key) const { return get(key).get<bool>(); }

json RunConfig::to_json() const {
  json out = json::object();
  for (const auto& [key, value] : values_) {
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    out[json::json_pointer(pointer)] = value;
  }
  return out;
}

std::filesystem::path RunConfig::output_dir() const {
  const std::string dir = str("output_dir");
  if (!dir.empty()) return dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "runs";
}

ModelConfig RunConfig::model_config(std::size_t embedding_dim) const {
  ModelConfig c;
  c.embedding_dim = embedding_dim;
  c.hidden_semantic = integer("model.hidden_semantic");
  c.hidden_final = integer("model.hidden_final");
  c.d_model = integer("model.d_model");
  c.heads = integer("model.heads");
  c.depth_levels = integer("model.depth_levels");
  c.attention = parse_attention_mode(str("model.covariate_attention"));
  c.stance_injection = flag("model.stance_injection");
  c.stance_distribution = flag("model.stance_distribution");
  c.depth_encoding = flag("model.depth_encoding");
  c.structural_covariates = flag("model.structural_covariates");
  c.validate();
  return c;
}

TrainOptions RunConfig::train_options() const {
  TrainOptions o;
  o.train.learning_rate = real("train.lr");
  o.train.weight_decay = real("train.weight_decay");
  o.train.clip_norm = real("train.clip");
  o.train.batch_size = integer("train.batch_size");
  o.train.epochs = integer("train.epochs");
  o.train.dropout = real("train.dropout");
  o.train.seed = integer("seed");
  o.train.validate();

  o.loss.gamma = real("loss.gamma");
  const std::string reduction = str("loss.reduction");
  if (reduction == "mean") {
    o.loss.reduction = nn::Reduction::kMean;
  } else if (reduction == "sum") {
    o.loss.reduction = nn::Reduction::kSum;
  } else {
    throw ConfigError("loss.reduction must be 'mean' or 'sum', got '" + reduction + "'");
  }
  const std::string weights = str("loss.class_weights");
  if (weights == "inverse_frequency") {
    o.weighting = ClassWeighting::kInverseFrequency;
  } else if (weights == "none") {
    o.weighting = ClassWeighting::kNone;
  } else {
    throw ConfigError("loss.class_weights must be 'inverse_frequency' or 'none', got '" + weights + "'");
  }
  o.loss.validate();
  return o;
}

NormalizationConfig RunConfig::normalization() const {
  NormalizationConfig n;
  n.url_token = str("text.url_token");
  n.mention_token = str("text.mention_token");
  n.segment_hashtags = flag("text.segment_hashtags");
  if (const std::string table = str("text.emoji_table"); !table.empty()) {
    n.emoji = std::make_shared<EmojiTable>(EmojiTable::load(table));
  }
  n.validate();
  return n;
}

LoadOptions RunConfig::load_options() const {
  const std::string policy = str("data.missing_stance");
  LoadOptions o;
  if (policy == "reject") {
    o.missing_stance = MissingStancePolicy::kReject;
  } else if (policy == "comment") {
    o.missing_stance = MissingStancePolicy::kComment;
  } else {
    throw ConfigError("data.missing_stance must be 'reject' or 'comment', got '" + policy + "'");
  }
  return o;
}

std::vector<double> RunConfig::early_checkpoints() const {
  std::vector<double> out;
  for (const json& v : get("eval.checkpoints")) {
    if (!v.is_number()) throw ConfigError("eval.checkpoints must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<PlatformPair> RunConfig::platform_pairs() const {
  std::vector<PlatformPair> out;
  for (const json& v : get("eval.pairs")) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string()) {
      throw ConfigError("eval.pairs entries must be [train_platform, test_platform] string pairs");
    }
    out.emplace_back(v[0].get<std::string>(), v[1].get<std::string>());
  }
  if (out.empty()) throw ConfigError("eval.pairs must not be empty");
  return out;
}

std::vector<std::string> RunConfig::loeo_events() const {
  std::vector<std::string> out;
  for (const json& v : get("eval.events")) {
    if (!v.is_string()) throw ConfigError("eval.events must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

ConfigFile parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ConfigFile out;
  json grid = json::object();
  if (auto it = doc.find("grid"); it != doc.end()) {
    grid = *it;
    doc.erase(it);
    if (!grid.is_object()) throw ConfigError("'grid' must map keys to arrays of values");
  }

  std::vector<std::pair<std::string, json>> flat;
  flatten(doc, "", flat);
  std::set<std::string> seen;
  for (const auto& [key, value] : flat) {
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' is given twice");
    out.base.set(key, value);
  }

  std::vector<std::pair<std::string, json>> axes;
  flatten(grid, "", axes);
  for (auto& [key, values] : axes) {
    if (!values.is_array() || values.empty()) {
      throw ConfigError("grid entry '" + key + "' must be a non-empty array of values");
    }
    RunConfig probe = out.base;
    std::vector<json> list;
    for (const json& v : values) {
      probe.set(key, v);
      list.push_back(v);
    }
    out.grid.emplace_back(key, std::move(list));
  }
  return out;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const Grid& grid, const std::vector<std::string>& overrides) {
  std::vector<RunConfig> runs = {base};
  for (const auto& [key, values] : grid) {
    std::vector<RunConfig> next;
    for (const RunConfig& run : runs) {
      for (const json& v : values) {
        RunConfig r = run;
        r.set(key, v);
        next.push_back(std::move(r));
      }
    }
    runs = std::move(next);
  }
  for (RunConfig& run : runs) {
    for (const std::string& o : overrides) run.set_assignment(o);
  }
  return runs;
}

}  // namespace rumor::cli
