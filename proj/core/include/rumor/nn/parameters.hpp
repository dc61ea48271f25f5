#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rumor::nn {

class Rng;

// A trainable tensor: value, gradient slot and Adam moment estimates. 1-D
// parameters have cols == 1.
struct Parameter {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> adam_m;
  std::vector<double> adam_v;

  std::size_t size() const { return value.size(); }
  double& at(std::size_t r, std::size_t c) { return value[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return value[r * cols + c]; }
};

// Index of a parameter inside a ParameterSet. Indices stay valid when the
// set is copied, so snapshots of a model remain self-consistent.
using ParamId = std::size_t;

// Ordered, named collection of parameters.
class ParameterSet {
 public:
  ParamId add(std::string name, std::size_t rows, std::size_t cols, double fill = 0.0);

  Parameter& operator[](ParamId id) { return params_.at(id); }
  const Parameter& operator[](ParamId id) const { return params_.at(id); }

  // Throws std::out_of_range for unknown names.
  const Parameter& by_name(const std::string& name) const;
  Parameter& by_name(const std::string& name);

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t scalar_count() const;

  void zero_grad();
  void reset_optimizer_state();
  double grad_norm() const;
  double value_norm() const;

  // Rounds every value to the nearest 32-bit float, the checkpoint payload
  // precision.
  void round_to_float();

  bool values_equal(const ParameterSet& other) const;

 private:
  std::vector<Parameter> params_;
};

// Kaiming-style uniform fan-in init: U(-sqrt(6/fan_in), sqrt(6/fan_in)),
// rounded to float precision.
void init_uniform_fan_in(Parameter& p, std::size_t fan_in, Rng& rng);

}  // namespace rumor::nn
