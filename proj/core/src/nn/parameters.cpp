#include "rumor/nn/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "rumor/nn/random.hpp"

namespace rumor::nn {

ParamId ParameterSet::add(std::string name, std::size_t rows, std::size_t cols, double fill) {
  for (const Parameter& p : params_) {
    if (p.name == name) throw std::logic_error("duplicate parameter name '" + name + "'");
  }
  Parameter p;
  p.name = std::move(name);
  p.rows = rows;
  p.cols = cols;
  p.value.assign(rows * cols, fill);
  p.grad.assign(rows * cols, 0.0);
  p.adam_m.assign(rows * cols, 0.0);
  p.adam_v.assign(rows * cols, 0.0);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

const Parameter& ParameterSet::by_name(const std::string& name) const {
  auto it = std::find_if(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
  if (it == params_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return *it;
}

Parameter& ParameterSet::by_name(const std::string& name) {
  return const_cast<Parameter&>(std::as_const(*this).by_name(name));
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (Parameter& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

void ParameterSet::reset_optimizer_state() {
  for (Parameter& p : params_) {
    std::fill(p.adam_m.begin(), p.adam_m.end(), 0.0);
    std::fill(p.adam_v.begin(), p.adam_v.end(), 0.0);
  }
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (const Parameter& p : params_) {
    for (double g : p.grad) sq += g * g;
  }
  return std::sqrt(sq);
}

double ParameterSet::value_norm() const {
  double sq = 0.0;
  for (const Parameter& p : params_) {
    for (double v : p.value) sq += v * v;
  }
  return std::sqrt(sq);
}

void ParameterSet::round_to_float() {
  for (Parameter& p : params_) {
    for (double& v : p.value) v = static_cast<double>(static_cast<float>(v));
  }
}

bool ParameterSet::values_equal(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& a = params_[i];
    const Parameter& b = other.params_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.value != b.value) return false;
  }
  return true;
}

void init_uniform_fan_in(Parameter& p, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : p.value) v = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
}

}  // namespace rumor::nn
