#include "rumor/covariates.hpp"

#include <algorithm>

#include "rumor/error.hpp"

namespace rumor {
namespace {

constexpr std::size_t kNumTokens = 1 + kNumStances;

// Offset and length of token k inside s'.
std::pair<std::size_t, std::size_t> token_span(std::size_t k, std::size_t levels) {
  if (k == 0) return {0, kNumStances};
  return {kNumStances + (k - 1) * levels, levels};
}

}  // namespace

StanceDistribution stance_distribution(std::span<const Stance> stances) {
  StanceDistribution dist{};
  if (stances.empty()) return dist;
  std::array<std::size_t, kNumStances> counts{};
  for (Stance s : stances) ++counts[index_of(s)];
  const double total = static_cast<double>(stances.size());
  for (std::size_t i = 0; i < kNumStances; ++i) dist[i] = static_cast<double>(counts[i]) / total;
  return dist;
}

Vector depth_one_hot(std::size_t depth, std::size_t levels) {
  if (levels < 1) throw ConfigError("depth levels must be >= 1");
  Vector v(levels, 0.0);
  v[std::min(depth, levels - 1)] = 1.0;
  return v;
}

StanceSlots average_depth_by_stance(std::span<const DepthStance> replies, std::size_t levels) {
  std::vector<InjectedReply> encoded;
  encoded.reserve(replies.size());
  for (const DepthStance& r : replies) encoded.push_back({depth_one_hot(r.depth, levels), r.stance});
  return aggregate_by_stance(encoded, levels);
}

Vector covariate_vector(const StanceDistribution& distribution, const StanceSlots& depth_averages) {
  Vector out(distribution.begin(), distribution.end());
  for (const Vector& d : depth_averages) out.insert(out.end(), d.begin(), d.end());
  return out;
}

std::string_view attention_mode_name(AttentionMode mode) {
  return mode == AttentionMode::kSingle ? "single" : "tokens";
}

AttentionMode parse_attention_mode(std::string_view name) {
  if (name == "single") return AttentionMode::kSingle;
  if (name == "tokens") return AttentionMode::kTokens;
  throw ConfigError("covariate_attention must be \"single\" or \"tokens\", got \"" + std::string(name) + "\"");
}

CovariateAttentionParams add_covariate_attention(nn::ParameterSet& params, AttentionMode mode,
                                                 std::size_t levels, std::size_t d_model, std::size_t heads) {
  if (levels < 1) throw ConfigError("depth levels must be >= 1");
  if (d_model < 1) throw ConfigError("d_model must be >= 1");
  if (heads < 1 || d_model % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide d_model (" +
                      std::to_string(d_model) + ")");
  }
  CovariateAttentionParams ids;
  ids.mode = mode;
  ids.levels = levels;
  ids.d_model = d_model;
  std::size_t d_in = kNumStances + kNumStances * levels;
  if (mode == AttentionMode::kTokens) {
    for (std::size_t k = 0; k < kNumTokens; ++k) {
      const std::string prefix = "covariates.token" + std::to_string(k);
      const std::size_t width = token_span(k, levels).second;
      ids.token_projections.push_back(
          {params.add(prefix + ".weight", d_model, width), params.add(prefix + ".bias", d_model, 1)});
    }
    d_in = d_model;
  }
  ids.attention = nn::add_attention(params, "covariates.attention", d_in, d_model, heads);
  ids.norm_gain = params.add("covariates.norm.gain", d_model, 1, 1.0);
  ids.norm_bias = params.add("covariates.norm.bias", d_model, 1);
  return ids;
}

Vector attend_covariates(std::span<const double> covariates, const nn::ParameterSet& params,
                         const CovariateAttentionParams& ids, CovariateAttentionCache* cache) {
  const std::size_t expected = kNumStances + kNumStances * ids.levels;
  if (covariates.size() != expected) {
    throw ShapeMismatchError("covariate vector has length " + std::to_string(covariates.size()) +
                             ", expected " + std::to_string(expected));
  }

  nn::Matrix tokens;
  std::vector<Vector> token_inputs;
  if (ids.mode == AttentionMode::kSingle) {
    tokens = nn::Matrix(1, covariates.size());
    std::copy(covariates.begin(), covariates.end(), tokens.row(0).begin());
  } else {
    tokens = nn::Matrix(kNumTokens, ids.d_model);
    for (std::size_t k = 0; k < kNumTokens; ++k) {
      const auto [off, len] = token_span(k, ids.levels);
      token_inputs.emplace_back(covariates.begin() + off, covariates.begin() + off + len);
      const auto& [w, b] = ids.token_projections[k];
      nn::linear_forward(params[w], params[b], token_inputs.back(), tokens.row(k));
    }
  }

  nn::AttentionCache attention_cache;
  const nn::Matrix attended = nn::multi_head_attention(params, ids.attention, tokens, cache ? &attention_cache : nullptr);

  Vector normed(ids.d_model);
  nn::LayerNormCache norm;
  nn::layer_norm_forward(params[ids.norm_gain], params[ids.norm_bias], attended.row(0), normed,
                         cache ? &norm : nullptr);
  Vector out(ids.d_model);
  nn::relu_forward(normed, out);

  if (cache) {
    cache->token_inputs = std::move(token_inputs);
    cache->attention = std::move(attention_cache);
    cache->norm = std::move(norm);
    cache->output = out;
  }
  return out;
}

Vector attend_covariates_backward(nn::ParameterSet& params, const CovariateAttentionParams& ids,
                                  const CovariateAttentionCache& cache, std::span<const double> d_output) {
  Vector d_normed(ids.d_model);
  nn::relu_backward(cache.output, d_output, d_normed);
  const std::size_t n = cache.attention.input.rows();
  nn::Matrix d_attended(n, ids.d_model);
  nn::layer_norm_backward(params[ids.norm_gain], params[ids.norm_bias], cache.norm, d_normed, d_attended.row(0));
  const nn::Matrix d_tokens = nn::multi_head_attention_backward(params, ids.attention, cache.attention, d_attended);

  if (ids.mode == AttentionMode::kSingle) {
    const auto row = d_tokens.row(0);
    return Vector(row.begin(), row.end());
  }
  Vector d_covariates(kNumStances + kNumStances * ids.levels, 0.0);
  for (std::size_t k = 0; k < kNumTokens; ++k) {
    const auto [off, len] = token_span(k, ids.levels);
    const auto& [w, b] = ids.token_projections[k];
    nn::linear_backward(params[w], params[b], cache.token_inputs[k], d_tokens.row(k),
                        std::span<double>(d_covariates).subspan(off, len));
  }
  return d_covariates;
}

}  // namespace rumor
