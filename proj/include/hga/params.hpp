#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "hga/tensor.hpp"

namespace hga {

using GradMap = std::map<std::string, Tensor>;

struct Parameter {
  Tensor value;
  Tensor grad;
  // Adam first and second moments.
  Tensor moment1;
  Tensor moment2;
};

// Named trainable tensors with their gradients and optimizer state.
// Iteration order is lexicographic by name, which keeps every reduction
// and checkpoint deterministic.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  const Tensor& value(const std::string& name) const;
  Tensor& value(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  Tensor& grad(const std::string& name);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  // grad[name] += scale * grads[name] for every entry.
  void accumulate(const GradMap& grads, double scale = 1.0);

  std::map<std::string, Parameter>& entries() { return params_; }
  const std::map<std::string, Parameter>& entries() const { return params_; }

 private:
  std::map<std::string, Parameter> params_;
};

Tensor normal_tensor(Shape shape, double stddev, std::mt19937_64& rng);

}  // namespace hga
