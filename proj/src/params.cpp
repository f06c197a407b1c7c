#include "hga/params.hpp"

#include "hga/error.hpp"

namespace hga {

void ParamStore::add(const std::string& name, Tensor value) {
  if (params_.count(name)) throw InvalidArgument("duplicate parameter name: " + name);
  Parameter p;
  p.grad = Tensor(value.shape());
  p.moment1 = Tensor(value.shape());
  p.moment2 = Tensor(value.shape());
  p.value = std::move(value);
  params_.emplace(name, std::move(p));
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const { return at(name).value; }
Tensor& ParamStore::value(const std::string& name) { return at(name).value; }
const Tensor& ParamStore::grad(const std::string& name) const { return at(name).grad; }
Tensor& ParamStore::grad(const std::string& name) { return at(name).grad; }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, p] : params_) p.grad.fill(0.0);
}

void ParamStore::accumulate(const GradMap& grads, double scale) {
  for (const auto& [name, g] : grads) {
    Tensor& dst = grad(name);
    if (dst.shape() != g.shape()) {
      throw InvalidArgument("gradient shape mismatch for " + name + ": " + shape_string(g.shape()) +
                            " vs " + shape_string(dst.shape()));
    }
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += scale * g[i];
  }
}

Tensor normal_tensor(Shape shape, double stddev, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace hga
