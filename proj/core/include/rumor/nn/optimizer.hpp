#pragma once

#include <cstdint>

#include "rumor/nn/parameters.hpp"

namespace rumor::nn {

struct TrainConfig {
  double learning_rate = 3e-4;
  double weight_decay = 5e-6;
  double clip_norm = 1.0;  // <= 0 disables clipping
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  double dropout = 0.5;
  std::uint64_t seed = 42;

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Scales all gradients so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

// One Adam step at step index t >= 1 (bias-corrected), followed by decoupled
// weight decay theta -= lr * weight_decay * theta. Gradients are clipped to
// config.clip_norm first.
void adam_step(ParameterSet& params, const TrainConfig& config, std::uint64_t t);

}  // namespace rumor::nn
