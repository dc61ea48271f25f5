#pragma once

// Differentiable primitives with hand-written backward passes. Forward
// functions optionally fill a cache; backward functions accumulate
// parameter gradients (+=) and write input gradients (=).

#include <span>

#include "rumor/nn/parameters.hpp"
#include "rumor/nn/random.hpp"
#include "rumor/nn/tensor.hpp"

namespace rumor::nn {

inline constexpr double kLayerNormEps = 1e-5;

// Dropout is active only when `train` is set; `rng` must then be non-null.
struct ForwardMode {
  bool train = false;
  double dropout = 0.0;
  Rng* rng = nullptr;

  static ForwardMode eval() { return {}; }
};

// y = W x + b, W is (out x in).
void linear_forward(const Parameter& w, const Parameter& b, std::span<const double> x, std::span<double> y);
// dx may be empty when the input gradient is not needed.
void linear_backward(Parameter& w, Parameter& b, std::span<const double> x, std::span<const double> dy,
                     std::span<double> dx);

struct LayerNormCache {
  Vector normalized;
  double inv_std = 0.0;
};

// Normalizes over the whole vector, then applies gain and bias.
void layer_norm_forward(const Parameter& gain, const Parameter& bias, std::span<const double> x,
                        std::span<double> y, LayerNormCache* cache);
void layer_norm_backward(Parameter& gain, Parameter& bias, const LayerNormCache& cache,
                         std::span<const double> dy, std::span<double> dx);

void relu_forward(std::span<const double> x, std::span<double> y);
// Uses the forward output: gradient passes where y > 0.
void relu_backward(std::span<const double> y, std::span<const double> dy, std::span<double> dx);

// Inverted dropout: survivors scaled by 1/(1-p). An empty mask is identity.
struct DropoutMask {
  Vector scale;
};
DropoutMask make_dropout_mask(std::size_t n, const ForwardMode& mode);
void dropout_apply(const DropoutMask& mask, std::span<const double> x, std::span<double> y);

// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);
// dlogits = p * (dp - <dp, p>).
Vector softmax_backward(std::span<const double> probs, std::span<const double> dprobs);

// Linear -> LayerNorm -> ReLU -> Dropout.
struct FeedForwardParams {
  ParamId weight = 0;
  ParamId bias = 0;
  ParamId gain = 0;
  ParamId shift = 0;
};

FeedForwardParams add_feed_forward(ParameterSet& params, const std::string& prefix, std::size_t in,
                                   std::size_t out);

struct FeedForwardCache {
  Vector input;
  LayerNormCache norm;
  Vector activated;
  DropoutMask mask;
};

// Throws NumericError if the linear pre-activation is not finite.
Vector feed_forward(const ParameterSet& params, const FeedForwardParams& ids, std::span<const double> x,
                    const ForwardMode& mode, FeedForwardCache* cache);
void feed_forward_backward(ParameterSet& params, const FeedForwardParams& ids, const FeedForwardCache& cache,
                           std::span<const double> dy, std::span<double> dx);

}  // namespace rumor::nn
