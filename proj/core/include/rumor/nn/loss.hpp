#pragma once

// Class-weighted focal loss over a softmax output.
//
//   FL(p, y) = -alpha_y * (1 - p_y)^gamma * log(max(p_y, eps))
//
// gamma = 0 with unit weights is plain cross-entropy.

#include <array>
#include <span>

#include "rumor/nn/tensor.hpp"
#include "rumor/thread.hpp"

namespace rumor::nn {

inline constexpr double kProbabilityClamp = 1e-12;

enum class Reduction { kMean, kSum };

struct LossConfig {
  double gamma = 2.0;
  std::array<double, kNumClasses> alpha = {1.0, 1.0, 1.0};
  Reduction reduction = Reduction::kMean;

  // Throws ConfigError if gamma < 0 or any alpha < 0.
  void validate() const;
};

double focal_loss(std::span<const double> probs, std::size_t gold, const LossConfig& config);

// Gradient of focal_loss with respect to the logits that produced `probs`
// through a softmax. Uses the same clamp as the loss.
Vector focal_loss_grad_logits(std::span<const double> probs, std::size_t gold, const LossConfig& config);

// alpha_i = N / n_i for n_i > 0, else 0, with N = sum of counts.
std::array<double, kNumClasses> class_weights(std::span<const std::size_t> counts);

}  // namespace rumor::nn
