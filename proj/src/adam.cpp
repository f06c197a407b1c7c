#include "hga/adam.hpp"

#include <cmath>

#include "hga/error.hpp"

namespace hga {

void adam_step(ParamStore& params, const AdamConfig& cfg, long step) {
  if (!(cfg.lr > 0.0)) throw InvalidArgument("adam learning rate must be positive");
  if (step < 1) throw InvalidArgument("adam step is 1-based");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (auto& [name, p] : params.entries()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.moment1[i] = cfg.beta1 * p.moment1[i] + (1.0 - cfg.beta1) * g;
      p.moment2[i] = cfg.beta2 * p.moment2[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = p.moment1[i] / c1;
      const double v_hat = p.moment2[i] / c2;
      p.value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace hga
