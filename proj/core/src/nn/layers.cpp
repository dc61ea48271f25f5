#include "rumor/nn/layers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "rumor/error.hpp"

namespace rumor::nn {

void linear_forward(const Parameter& w, const Parameter& b, std::span<const double> x, std::span<double> y) {
  assert(x.size() == w.cols && y.size() == w.rows && b.size() == w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* wr = w.value.data() + r * w.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = acc + b.value[r];
  }
}

void linear_backward(Parameter& w, Parameter& b, std::span<const double> x, std::span<const double> dy,
                     std::span<double> dx) {
  assert(x.size() == w.cols && dy.size() == w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    double* gr = w.grad.data() + r * w.cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < w.cols; ++c) gr[c] += g * x[c];
    b.grad[r] += g;
  }
  if (dx.empty()) return;
  assert(dx.size() == w.cols);
  std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* wr = w.value.data() + r * w.cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < w.cols; ++c) dx[c] += wr[c] * g;
  }
}

void layer_norm_forward(const Parameter& gain, const Parameter& bias, std::span<const double> x,
                        std::span<double> y, LayerNormCache* cache) {
  const std::size_t n = x.size();
  assert(gain.size() == n && bias.size() == n && y.size() == n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

  Vector normalized(n);
  for (std::size_t i = 0; i < n; ++i) {
    normalized[i] = (x[i] - mean) * inv_std;
    y[i] = gain.value[i] * normalized[i] + bias.value[i];
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = inv_std;
  }
}

void layer_norm_backward(Parameter& gain, Parameter& bias, const LayerNormCache& cache,
                         std::span<const double> dy, std::span<double> dx) {
  const std::size_t n = dy.size();
  const Vector& xhat = cache.normalized;
  double sum_dxhat = 0.0;
  double sum_dxhat_xhat = 0.0;
  Vector dxhat(n);
  for (std::size_t i = 0; i < n; ++i) {
    gain.grad[i] += dy[i] * xhat[i];
    bias.grad[i] += dy[i];
    dxhat[i] = dy[i] * gain.value[i];
    sum_dxhat += dxhat[i];
    sum_dxhat_xhat += dxhat[i] * xhat[i];
  }
  if (dx.empty()) return;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = cache.inv_std / nd * (nd * dxhat[i] - sum_dxhat - xhat[i] * sum_dxhat_xhat);
  }
}

void relu_forward(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::span<const double> y, std::span<const double> dy, std::span<double> dx) {
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

DropoutMask make_dropout_mask(std::size_t n, const ForwardMode& mode) {
  DropoutMask mask;
  if (!mode.train || mode.dropout <= 0.0) return mask;
  if (mode.rng == nullptr) throw StateError("dropout in training mode needs a random generator");
  const double keep_scale = 1.0 / (1.0 - mode.dropout);
  mask.scale.resize(n);
  for (double& s : mask.scale) s = mode.rng->uniform() < mode.dropout ? 0.0 : keep_scale;
  return mask;
}

void dropout_apply(const DropoutMask& mask, std::span<const double> x, std::span<double> y) {
  if (mask.scale.empty()) {
    std::copy(x.begin(), x.end(), y.begin());
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask.scale[i];
}

Vector softmax(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  Vector p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

Vector softmax_backward(std::span<const double> probs, std::span<const double> dprobs) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * dprobs[i];
  Vector dz(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) dz[i] = probs[i] * (dprobs[i] - dot);
  return dz;
}

FeedForwardParams add_feed_forward(ParameterSet& params, const std::string& prefix, std::size_t in,
                                   std::size_t out) {
  FeedForwardParams ids;
  ids.weight = params.add(prefix + ".linear.weight", out, in);
  ids.bias = params.add(prefix + ".linear.bias", out, 1);
  ids.gain = params.add(prefix + ".norm.gain", out, 1, 1.0);
  ids.shift = params.add(prefix + ".norm.bias", out, 1);
  return ids;
}

Vector feed_forward(const ParameterSet& params, const FeedForwardParams& ids, std::span<const double> x,
                    const ForwardMode& mode, FeedForwardCache* cache) {
  const Parameter& w = params[ids.weight];
  const std::size_t out = w.rows;
  Vector pre(out);
  linear_forward(w, params[ids.bias], x, pre);
  for (double v : pre) {
    if (!std::isfinite(v)) throw NumericError("non-finite activation in layer '" + w.name + "'");
  }
  Vector normed(out);
  LayerNormCache norm;
  layer_norm_forward(params[ids.gain], params[ids.shift], pre, normed, &norm);
  Vector activated(out);
  relu_forward(normed, activated);
  DropoutMask mask = make_dropout_mask(out, mode);
  Vector y(out);
  dropout_apply(mask, activated, y);
  if (cache) {
    cache->input.assign(x.begin(), x.end());
    cache->norm = std::move(norm);
    cache->activated = std::move(activated);
    cache->mask = std::move(mask);
  }
  return y;
}

void feed_forward_backward(ParameterSet& params, const FeedForwardParams& ids, const FeedForwardCache& cache,
                           std::span<const double> dy, std::span<double> dx) {
  const std::size_t out = dy.size();
  Vector d_act(out);
  dropout_apply(cache.mask, dy, d_act);
  Vector d_norm(out);
  relu_backward(cache.activated, d_act, d_norm);
  Vector d_pre(out);
  layer_norm_backward(params[ids.gain], params[ids.shift], cache.norm, d_norm, d_pre);
  linear_backward(params[ids.weight], params[ids.bias], cache.input, d_pre, dx);
}

}  // namespace rumor::nn
