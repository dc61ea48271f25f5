#pragma once

// Multi-head scaled dot-product self-attention over a short token sequence.
// Row-vector convention: Q = X Wq with X (tokens x d_in) and Wq (d_in x
// d_model). Head h uses columns [h*d_k, (h+1)*d_k) of Q, K, V, where
// d_k = d_model / heads. Heads are concatenated and projected by Wo + bo.

#include <string>
#include <vector>

#include "rumor/nn/parameters.hpp"
#include "rumor/nn/tensor.hpp"

namespace rumor::nn {

struct AttentionParams {
  ParamId query = 0;
  ParamId key = 0;
  ParamId value = 0;
  ParamId out_weight = 0;
  ParamId out_bias = 0;
  std::size_t heads = 1;
};

// Throws ConfigError unless heads >= 1 and heads divides d_model.
AttentionParams add_attention(ParameterSet& params, const std::string& prefix, std::size_t d_in,
                              std::size_t d_model, std::size_t heads);

struct AttentionCache {
  Matrix input;
  Matrix query;
  Matrix key;
  Matrix value;
  Matrix concat;
  std::vector<Matrix> weights;  // per head, tokens x tokens, rows sum to 1
};

// Returns tokens x d_model.
Matrix multi_head_attention(const ParameterSet& params, const AttentionParams& ids, const Matrix& x,
                            AttentionCache* cache);

// Accumulates parameter gradients; returns d(loss)/d(x).
Matrix multi_head_attention_backward(ParameterSet& params, const AttentionParams& ids,
                                     const AttentionCache& cache, const Matrix& d_out);

}  // namespace rumor::nn
