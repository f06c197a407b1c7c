#pragma once

#include "hga/params.hpp"

namespace hga {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update using the gradients held in `params`.
// `step` is 1-based. Moment state lives in the ParamStore.
void adam_step(ParamStore& params, const AdamConfig& cfg, long step);

}  // namespace hga
