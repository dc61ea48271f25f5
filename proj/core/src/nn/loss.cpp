#include "rumor/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "rumor/error.hpp"

namespace rumor::nn {

void LossConfig::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("focal loss gamma must be >= 0");
  for (double a : alpha) {
    if (!(a >= 0.0)) throw ConfigError("class weights must be >= 0");
  }
}

double focal_loss(std::span<const double> probs, std::size_t gold, const LossConfig& config) {
  const double p = probs[gold];
  const double clamped = std::max(p, kProbabilityClamp);
  const double modulation = config.gamma == 0.0 ? 1.0 : std::pow(1.0 - p, config.gamma);
  return -config.alpha[gold] * modulation * std::log(clamped);
}

Vector focal_loss_grad_logits(std::span<const double> probs, std::size_t gold, const LossConfig& config) {
  const double p = probs[gold];
  const double q = 1.0 - p;
  const double gamma = config.gamma;
  const double log_p = std::log(std::max(p, kProbabilityClamp));

  // d/dp of (1-p)^gamma * log(p).
  double d_inner = (p >= kProbabilityClamp) ? (gamma == 0.0 ? 1.0 : std::pow(q, gamma)) / p : 0.0;
  if (gamma != 0.0 && q > 0.0) d_inner -= gamma * std::pow(q, gamma - 1.0) * log_p;
  const double dl_dp = -config.alpha[gold] * d_inner;

  Vector grad(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) {
    grad[j] = dl_dp * p * ((j == gold ? 1.0 : 0.0) - probs[j]);
  }
  return grad;
}

std::array<double, kNumClasses> class_weights(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t n : counts) total += n;
  std::array<double, kNumClasses> w{};
  for (std::size_t i = 0; i < kNumClasses && i < counts.size(); ++i) {
    w[i] = counts[i] > 0 ? static_cast<double>(total) / static_cast<double>(counts[i]) : 0.0;
  }
  return w;
}

}  // namespace rumor::nn
