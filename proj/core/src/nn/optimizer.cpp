#include "rumor/nn/optimizer.hpp"

#include <cmath>

#include "rumor/error.hpp"

namespace rumor::nn {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("train.lr must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train.dropout must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  const double norm = params.grad_norm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Parameter& p : params) {
      for (double& g : p.grad) g *= scale;
    }
  }
  return norm;
}

void adam_step(ParameterSet& params, const TrainConfig& config, std::uint64_t t) {
  if (t < 1) throw StateError("adam_step: step index must be >= 1");
  clip_grad_norm(params, config.clip_norm);
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
  const double lr = config.learning_rate;
  const double decay = lr * config.weight_decay;
  for (Parameter& p : params) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      p.adam_m[i] = b1 * p.adam_m[i] + (1.0 - b1) * g;
      p.adam_v[i] = b2 * p.adam_v[i] + (1.0 - b2) * g * g;
      const double m_hat = p.adam_m[i] / correction1;
      const double v_hat = p.adam_v[i] / correction2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
      p.value[i] -= decay * p.value[i];
    }
  }
}

}  // namespace rumor::nn
