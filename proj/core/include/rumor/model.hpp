#pragma once

// The full veracity classifier for one thread:
//
//   e'(c), e'(r_i)      stance-injected post embeddings
//   e'(t)               source ++ per-stance reply means
//   h(t)                semantic feed-forward block on e'(t)
//   h_att               attended structural covariates
//   h_final             feed-forward block on h(t) ++ h_att
//   y_hat               softmax(W_o h_final + b_o)

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rumor/covariates.hpp"
#include "rumor/embedding_store.hpp"
#include "rumor/nn/layers.hpp"
#include "rumor/nn/parameters.hpp"
#include "rumor/stance_aggregator.hpp"
#include "rumor/thread.hpp"

namespace rumor {

struct ModelConfig {
  std::size_t embedding_dim = 0;  // D, fixed by the embedding source
  std::size_t hidden_semantic = 64;
  std::size_t hidden_final = 64;
  std::size_t d_model = 32;
  std::size_t heads = 4;
  std::size_t depth_levels = 24;
  AttentionMode attention = AttentionMode::kTokens;

  // Component switches; disabling one zeroes its contribution and keeps
  // every shape unchanged.
  bool stance_injection = true;
  bool stance_distribution = true;
  bool depth_encoding = true;
  bool structural_covariates = true;

  void validate() const;
  std::size_t injected_width() const { return embedding_dim + kNumStances; }
  std::size_t thread_vector_width() const { return injected_width() * (kNumStances + 1); }
  std::size_t covariate_width() const { return kNumStances * (1 + depth_levels); }

  bool operator==(const ModelConfig&) const = default;
};

std::string model_config_to_json(const ModelConfig& config);
// Throws ConfigError on missing or ill-typed keys.
ModelConfig model_config_from_json(const std::string& text);

// Everything the network consumes for one thread.
struct ThreadInputs {
  Vector source;                       // e'(c), D + 4
  std::vector<InjectedReply> replies;  // e'(r_i) with their stances
  Vector covariates;                   // s', 4 + 4L
};

// Source posts without a stance label are injected as S.
ThreadInputs featurize(const Thread& thread, const EmbeddingSource& embeddings, const ModelConfig& config);

struct InputGradients {
  Vector source;
  std::vector<Vector> replies;
  Vector covariates;
};

class Model {
 public:
  // Builds the parameter set for `config` and initializes it from `seed`.
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const CovariateAttentionParams& covariate_params() const { return covariate_; }

  struct Trace {
    bool recorded = false;
    std::vector<Stance> reply_stances;
    nn::FeedForwardCache semantic;
    CovariateAttentionCache covariates;
    nn::FeedForwardCache final;
    Vector hidden_final;
    Vector probs;
  };

  struct Output {
    Vector logits;
    Vector probs;
  };

  Output forward(const ThreadInputs& inputs, const nn::ForwardMode& mode, Trace* trace = nullptr) const;

  // Accumulates parameter gradients for d(loss)/d(logits). Throws StateError
  // if `trace` was not filled by forward().
  void backward(const Trace& trace, std::span<const double> d_logits, InputGradients* input_grads = nullptr);

 private:
  ModelConfig config_;
  nn::ParameterSet params_;
  nn::FeedForwardParams semantic_;
  CovariateAttentionParams covariate_;
  nn::FeedForwardParams final_;
  nn::ParamId output_weight_ = 0;
  nn::ParamId output_bias_ = 0;
};

std::size_t argmax(std::span<const double> values);
Veracity predict(const Model& model, const ThreadInputs& inputs);

// Featurizes and runs one thread; returns y_hat.
Vector forward_thread(const Thread& thread, const EmbeddingSource& embeddings, const Model& model,
                      const nn::ForwardMode& mode = nn::ForwardMode::eval());

}  // namespace rumor
