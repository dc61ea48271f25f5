#include "rumor/model.hpp"

#include <algorithm>

#include "json.hpp"
#include "rumor/error.hpp"
#include "rumor/nn/random.hpp"

namespace rumor {
namespace {

using nlohmann::json;

template <typename T>
T get_key(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("model config missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("model config key '") + key + "' has the wrong type");
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (embedding_dim < 1) throw ConfigError("embedding dim must be >= 1");
  if (hidden_semantic < 1) throw ConfigError("model.hidden_semantic must be >= 1");
  if (hidden_final < 1) throw ConfigError("model.hidden_final must be >= 1");
  if (d_model < 1) throw ConfigError("model.d_model must be >= 1");
  if (depth_levels < 1) throw ConfigError("model.depth_levels must be >= 1");
  if (heads < 1 || d_model % heads != 0) {
    throw ConfigError("model.heads (" + std::to_string(heads) + ") must divide model.d_model (" +
                      std::to_string(d_model) + ")");
  }
}

std::string model_config_to_json(const ModelConfig& c) {
  json j;
  j["embedding_dim"] = c.embedding_dim;
  j["hidden_semantic"] = c.hidden_semantic;
  j["hidden_final"] = c.hidden_final;
  j["d_model"] = c.d_model;
  j["heads"] = c.heads;
  j["depth_levels"] = c.depth_levels;
  j["covariate_attention"] = std::string(attention_mode_name(c.attention));
  j["stance_injection"] = c.stance_injection;
  j["stance_distribution"] = c.stance_distribution;
  j["depth_encoding"] = c.depth_encoding;
  j["structural_covariates"] = c.structural_covariates;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  ModelConfig c;
  c.embedding_dim = get_key<std::size_t>(j, "embedding_dim");
  c.hidden_semantic = get_key<std::size_t>(j, "hidden_semantic");
  c.hidden_final = get_key<std::size_t>(j, "hidden_final");
  c.d_model = get_key<std::size_t>(j, "d_model");
  c.heads = get_key<std::size_t>(j, "heads");
  c.depth_levels = get_key<std::size_t>(j, "depth_levels");
  c.attention = parse_attention_mode(get_key<std::string>(j, "covariate_attention"));
  c.stance_injection = get_key<bool>(j, "stance_injection");
  c.stance_distribution = get_key<bool>(j, "stance_distribution");
  c.depth_encoding = get_key<bool>(j, "depth_encoding");
  c.structural_covariates = get_key<bool>(j, "structural_covariates");
  return c;
}

ThreadInputs featurize(const Thread& thread, const EmbeddingSource& embeddings, const ModelConfig& config) {
  if (embeddings.dim() != config.embedding_dim) {
    throw ShapeMismatchError("embedding dim " + std::to_string(embeddings.dim()) + " does not match model dim " +
                             std::to_string(config.embedding_dim));
  }
  auto inject = [&](const Post& post, Stance stance) {
    Vector v = inject_stance(embeddings.lookup(post), stance);
    if (!config.stance_injection) std::fill(v.end() - kNumStances, v.end(), 0.0);
    return v;
  };

  ThreadInputs in;
  in.source = inject(thread.source, thread.source.stance.value_or(Stance::kSupport));

  const std::vector<std::size_t> depths = reply_depths(thread);
  std::vector<Stance> stances;
  std::vector<DepthStance> depth_stances;
  in.replies.reserve(thread.replies.size());
  for (std::size_t i = 0; i < thread.replies.size(); ++i) {
    const Post& r = thread.replies[i];
    if (!r.stance) {
      throw SchemaError("thread '" + thread.thread_id + "': post '" + r.post_id + "' has no stance label");
    }
    in.replies.push_back({inject(r, *r.stance), *r.stance});
    stances.push_back(*r.stance);
    depth_stances.push_back({depths[i], *r.stance});
  }

  StanceDistribution dist = stance_distribution(stances);
  if (!config.stance_distribution) dist.fill(0.0);
  StanceSlots depth_avg = average_depth_by_stance(depth_stances, config.depth_levels);
  if (!config.depth_encoding) {
    for (Vector& d : depth_avg) std::fill(d.begin(), d.end(), 0.0);
  }
  in.covariates = covariate_vector(dist, depth_avg);
  return in;
}

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const std::size_t h1 = config_.hidden_semantic;
  semantic_ = nn::add_feed_forward(params_, "semantic", config_.thread_vector_width(), h1);
  covariate_ = add_covariate_attention(params_, config_.attention, config_.depth_levels, config_.d_model,
                                       config_.heads);
  final_ = nn::add_feed_forward(params_, "final", h1 + config_.d_model, config_.hidden_final);
  output_weight_ = params_.add("output.weight", kNumClasses, config_.hidden_final);
  output_bias_ = params_.add("output.bias", kNumClasses, 1);

  // Linear weights (out x in) scale by their columns; attention projections
  // (in x out, row-vector convention) by their rows.
  nn::Rng rng(seed);
  for (nn::Parameter& p : params_) {
    const bool is_weight = p.name.ends_with(".weight");
    const bool is_projection = p.name.starts_with("covariates.attention.") &&
                               (is_weight || p.name.ends_with(".query") || p.name.ends_with(".key") ||
                                p.name.ends_with(".value"));
    if (is_projection) {
      nn::init_uniform_fan_in(p, p.rows, rng);
    } else if (is_weight) {
      nn::init_uniform_fan_in(p, p.cols, rng);
    }
  }
}

Model::Output Model::forward(const ThreadInputs& inputs, const nn::ForwardMode& mode, Trace* trace) const {
  const std::size_t width = config_.injected_width();
  if (inputs.source.size() != width) {
    throw ShapeMismatchError("source vector has length " + std::to_string(inputs.source.size()) + ", expected " +
                             std::to_string(width));
  }
  const StanceSlots slots = aggregate_by_stance(inputs.replies, width);
  const Vector thread_vector = assemble_thread_vector(inputs.source, slots);

  nn::FeedForwardCache semantic_cache;
  const Vector h = semantic_ffl(thread_vector, params_, semantic_, mode, trace ? &semantic_cache : nullptr);

  CovariateAttentionCache covariate_cache;
  Vector h_att(config_.d_model, 0.0);
  if (config_.structural_covariates) {
    h_att = attend_covariates(inputs.covariates, params_, covariate_, trace ? &covariate_cache : nullptr);
  } else if (inputs.covariates.size() != config_.covariate_width()) {
    throw ShapeMismatchError("covariate vector has length " + std::to_string(inputs.covariates.size()) +
                             ", expected " + std::to_string(config_.covariate_width()));
  }

  Vector z = h;
  z.insert(z.end(), h_att.begin(), h_att.end());
  nn::FeedForwardCache final_cache;
  Vector hidden_final = nn::feed_forward(params_, final_, z, mode, trace ? &final_cache : nullptr);

  Output out;
  out.logits.resize(kNumClasses);
  nn::linear_forward(params_[output_weight_], params_[output_bias_], hidden_final, out.logits);
  out.probs = nn::softmax(out.logits);

  if (trace) {
    trace->recorded = true;
    trace->reply_stances.clear();
    for (const InjectedReply& r : inputs.replies) trace->reply_stances.push_back(r.stance);
    trace->semantic = std::move(semantic_cache);
    trace->covariates = std::move(covariate_cache);
    trace->final = std::move(final_cache);
    trace->hidden_final = std::move(hidden_final);
    trace->probs = out.probs;
  }
  return out;
}

void Model::backward(const Trace& trace, std::span<const double> d_logits, InputGradients* input_grads) {
  if (!trace.recorded) throw StateError("backward called without a recorded forward pass");
  if (d_logits.size() != kNumClasses) throw ShapeMismatchError("logit gradient must have 3 components");

  Vector d_hidden_final(config_.hidden_final);
  nn::linear_backward(params_[output_weight_], params_[output_bias_], trace.hidden_final, d_logits, d_hidden_final);

  const std::size_t h1 = config_.hidden_semantic;
  Vector d_z(h1 + config_.d_model);
  nn::feed_forward_backward(params_, final_, trace.final, d_hidden_final, d_z);

  const std::span<const double> d_h(d_z.data(), h1);
  const std::span<const double> d_att(d_z.data() + h1, config_.d_model);

  Vector d_covariates(config_.covariate_width(), 0.0);
  if (config_.structural_covariates) {
    d_covariates = attend_covariates_backward(params_, covariate_, trace.covariates, d_att);
  }

  Vector d_thread(config_.thread_vector_width());
  nn::feed_forward_backward(params_, semantic_, trace.semantic, d_h, d_thread);

  if (input_grads) {
    const std::size_t width = config_.injected_width();
    input_grads->source.assign(d_thread.begin(), d_thread.begin() + static_cast<std::ptrdiff_t>(width));
    StanceSlots d_slots;
    for (std::size_t s = 0; s < kNumStances; ++s) {
      const auto begin = d_thread.begin() + static_cast<std::ptrdiff_t>((s + 1) * width);
      d_slots[s].assign(begin, begin + static_cast<std::ptrdiff_t>(width));
    }
    input_grads->replies = aggregate_by_stance_backward(trace.reply_stances, d_slots);
    input_grads->covariates = std::move(d_covariates);
  }
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

Veracity predict(const Model& model, const ThreadInputs& inputs) {
  return veracity_from_index(argmax(model.forward(inputs, nn::ForwardMode::eval()).probs));
}

Vector forward_thread(const Thread& thread, const EmbeddingSource& embeddings, const Model& model,
                      const nn::ForwardMode& mode) {
  return model.forward(featurize(thread, embeddings, model.config()), mode).probs;
}

}  // namespace rumor
