#pragma once

// Structural covariates of a reply thread: the normalized stance
// distribution v_d, per-stance averaged one-hot depth encodings d'(.), and
// the multi-head attention that turns s' = v_d ++ d'(S) ++ d'(D) ++ d'(Q) ++
// d'(C) into the attended representation h_att.
//
// Two attention readings are supported:
//   kSingle  s' is one token. Softmax over a length-1 sequence is exactly 1,
//            so every head returns its value projection and the query/key
//            weights have no effect.
//   kTokens  s' is split into five tokens (v_d and the four d'), each with its
//            own projection to d_model; full self-attention runs over the
//            five and the v_d token's output is kept.
// Both end with LayerNorm and ReLU.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rumor/nn/attention.hpp"
#include "rumor/nn/layers.hpp"
#include "rumor/stance_aggregator.hpp"
#include "rumor/thread.hpp"

namespace rumor {

using StanceDistribution = std::array<double, kNumStances>;

// count(s) / total; all zeros for an empty list.
StanceDistribution stance_distribution(std::span<const Stance> stances);

// One-hot of length `levels` at min(depth, levels - 1).
Vector depth_one_hot(std::size_t depth, std::size_t levels);

struct DepthStance {
  std::size_t depth;
  Stance stance;
};

// Per-stance mean of depth_one_hot; empty stances give zero vectors.
StanceSlots average_depth_by_stance(std::span<const DepthStance> replies, std::size_t levels);

// v_d ++ d'(S) ++ d'(D) ++ d'(Q) ++ d'(C), length 4 + 4 * levels.
Vector covariate_vector(const StanceDistribution& distribution, const StanceSlots& depth_averages);

enum class AttentionMode { kSingle, kTokens };

std::string_view attention_mode_name(AttentionMode mode);
// Throws ConfigError for anything but "single" / "tokens".
AttentionMode parse_attention_mode(std::string_view name);

struct CovariateAttentionParams {
  AttentionMode mode = AttentionMode::kTokens;
  std::size_t levels = 0;
  std::size_t d_model = 0;
  std::vector<std::array<nn::ParamId, 2>> token_projections;  // tokens mode: {weight, bias} x 5
  nn::AttentionParams attention;
  nn::ParamId norm_gain = 0;
  nn::ParamId norm_bias = 0;
};

CovariateAttentionParams add_covariate_attention(nn::ParameterSet& params, AttentionMode mode,
                                                 std::size_t levels, std::size_t d_model, std::size_t heads);

struct CovariateAttentionCache {
  std::vector<Vector> token_inputs;
  nn::AttentionCache attention;
  nn::LayerNormCache norm;
  Vector output;
};

// h_att, length d_model. Throws ShapeMismatchError if s' has the wrong length.
Vector attend_covariates(std::span<const double> covariates, const nn::ParameterSet& params,
                         const CovariateAttentionParams& ids, CovariateAttentionCache* cache = nullptr);

// Accumulates parameter gradients; returns d(loss)/d(s').
Vector attend_covariates_backward(nn::ParameterSet& params, const CovariateAttentionParams& ids,
                                  const CovariateAttentionCache& cache, std::span<const double> d_output);

}  // namespace rumor
