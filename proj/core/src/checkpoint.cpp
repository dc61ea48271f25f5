#include "rumor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "json.hpp"
#include "rumor/error.hpp"
#include "rumor/embedding_store.hpp"

namespace rumor {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
static_assert(std::numeric_limits<float>::is_iec559, "checkpoint payloads are IEEE-754 binary32");

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw CheckpointError(std::string(what) + " too large");
  return static_cast<std::uint32_t>(v);
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) throw CheckpointError(std::string("truncated checkpoint while reading ") + what);
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

const char* reduction_name(nn::Reduction r) { return r == nn::Reduction::kSum ? "sum" : "mean"; }

json train_to_json(const nn::TrainConfig& t) {
  return {{"lr", t.learning_rate},  {"weight_decay", t.weight_decay}, {"clip", t.clip_norm},
          {"batch_size", t.batch_size}, {"epochs", t.epochs},         {"dropout", t.dropout},
          {"seed", t.seed},         {"beta1", t.beta1},               {"beta2", t.beta2},
          {"epsilon", t.epsilon}};
}

json loss_to_json(const nn::LossConfig& l) {
  return {{"gamma", l.gamma}, {"alpha", l.alpha}, {"reduction", reduction_name(l.reduction)}};
}

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw CheckpointError(std::string("checkpoint config is missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CheckpointError(std::string("checkpoint config field '") + key + "' has the wrong type");
  }
}

nn::TrainConfig train_from_json(const json& j) {
  nn::TrainConfig t;
  t.learning_rate = field<double>(j, "lr");
  t.weight_decay = field<double>(j, "weight_decay");
  t.clip_norm = field<double>(j, "clip");
  t.batch_size = field<std::size_t>(j, "batch_size");
  t.epochs = field<std::size_t>(j, "epochs");
  t.dropout = field<double>(j, "dropout");
  t.seed = field<std::uint64_t>(j, "seed");
  t.beta1 = field<double>(j, "beta1");
  t.beta2 = field<double>(j, "beta2");
  t.epsilon = field<double>(j, "epsilon");
  return t;
}

nn::LossConfig loss_from_json(const json& j) {
  nn::LossConfig l;
  l.gamma = field<double>(j, "gamma");
  l.alpha = field<std::array<double, kNumClasses>>(j, "alpha");
  const std::string red = field<std::string>(j, "reduction");
  if (red == "mean") {
    l.reduction = nn::Reduction::kMean;
  } else if (red == "sum") {
    l.reduction = nn::Reduction::kSum;
  } else {
    throw CheckpointError("checkpoint loss reduction '" + red + "' is not recognised");
  }
  return l;
}

std::string veracity_order() {
  std::string s;
  for (Veracity v : kAllVeracities) s += veracity_code(v);
  return s;
}

std::string stance_order() {
  std::string s;
  for (Stance st : kAllStances) s += stance_code(st);
  return s;
}

}  // namespace

void save_checkpoint(const TrainedModel& trained, const std::filesystem::path& path) {
  json config;
  config["model"] = json::parse(model_config_to_json(trained.model.config()));
  config["train"] = train_to_json(trained.train);
  config["loss"] = loss_to_json(trained.loss);
  config["best_epoch"] = trained.best_epoch;
  config["best_dev_macro_f1"] = trained.best_dev_macro_f1;
  config["veracity_order"] = veracity_order();
  config["stance_order"] = stance_order();
  const std::string echo = config.dump();

  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, checked_u32(echo.size(), "config echo"));
  out += echo;
  put<std::uint64_t>(out, trained.train.seed);
  put<std::uint64_t>(out, trained.steps);

  const std::size_t params_begin = out.size();
  const nn::ParameterSet& params = trained.model.params();
  put<std::uint32_t>(out, checked_u32(params.size(), "parameter count"));
  for (const nn::Parameter& p : params) {
    put<std::uint32_t>(out, checked_u32(p.name.size(), "parameter name"));
    out += p.name;
    put<std::uint32_t>(out, checked_u32(p.rows, "parameter rows"));
    put<std::uint32_t>(out, checked_u32(p.cols, "parameter cols"));
    for (double v : p.value) put<float>(out, static_cast<float>(v));
  }
  put<std::uint64_t>(out, stable_hash64(std::string_view(out).substr(params_begin)));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for checkpoint '" + path.string() + "'");
}

TrainedModel load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint '" + path.string() + "'");
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader in(data);
  if (in.bytes(sizeof kCheckpointMagic, "magic") != std::string(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw CheckpointError("'" + path.string() + "' is not a checkpoint (bad magic)");
  }
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto echo_len = in.get<std::uint32_t>("config length");
  json config;
  try {
    config = json::parse(in.bytes(echo_len, "config echo"));
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("malformed checkpoint config echo: ") + e.what());
  }
  if (!config.is_object()) throw CheckpointError("checkpoint config echo is not an object");
  if (field<std::string>(config, "veracity_order") != veracity_order() ||
      field<std::string>(config, "stance_order") != stance_order()) {
    throw CheckpointError("checkpoint label order differs from this build");
  }

  const ModelConfig model_config = model_config_from_json(field<json>(config, "model").dump());
  model_config.validate();
  if (expected && !(*expected == model_config)) {
    throw ConfigError("checkpoint model config " + model_config_to_json(model_config) +
                      " does not match the requested config " + model_config_to_json(*expected));
  }

  nn::TrainConfig train = train_from_json(field<json>(config, "train"));
  const nn::LossConfig loss = loss_from_json(field<json>(config, "loss"));
  train.seed = in.get<std::uint64_t>("seed");
  const auto steps = in.get<std::uint64_t>("step count");

  TrainedModel out{Model(model_config, train.seed), train, loss, steps, field<std::size_t>(config, "best_epoch"),
                   field<double>(config, "best_dev_macro_f1")};
  nn::ParameterSet& params = out.model.params();

  const std::size_t params_begin = in.pos();
  const auto count = in.get<std::uint32_t>("parameter count");
  if (count != params.size()) {
    throw ShapeMismatchError("checkpoint holds " + std::to_string(count) + " parameters, the model config needs " +
                             std::to_string(params.size()));
  }
  for (nn::Parameter& p : params) {
    const auto name_len = in.get<std::uint32_t>("parameter name length");
    const std::string name = in.bytes(name_len, "parameter name");
    if (name != p.name) {
      throw ShapeMismatchError("checkpoint parameter '" + name + "' found where '" + p.name + "' was expected");
    }
    const auto rows = in.get<std::uint32_t>("parameter rows");
    const auto cols = in.get<std::uint32_t>("parameter cols");
    if (rows != p.rows || cols != p.cols) {
      throw ShapeMismatchError("parameter '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
                               " in the checkpoint but " + std::to_string(p.rows) + "x" + std::to_string(p.cols) +
                               " under its model config");
    }
    for (double& v : p.value) v = static_cast<double>(in.get<float>("parameter payload"));
  }
  const std::size_t params_end = in.pos();
  const auto checksum = in.get<std::uint64_t>("checksum");
  if (in.remaining() != 0) {
    throw CheckpointError("checkpoint has " + std::to_string(in.remaining()) + " unexpected trailing bytes");
  }
  if (checksum != stable_hash64(std::string_view(data).substr(params_begin, params_end - params_begin))) {
    throw CheckpointError("checkpoint checksum mismatch (file is corrupt)");
  }
  return out;
}

}  // namespace rumor
