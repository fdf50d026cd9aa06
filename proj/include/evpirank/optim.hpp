#pragma once

#include <cstdint>
#include <vector>

#include "evpirank/tensor.hpp"

namespace evpirank {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates, one buffer per parameter tensor.
struct AdamState {
  std::vector<Vector> m;
  std::vector<Vector> v;
  std::int64_t step = 0;

  static AdamState for_params(const TensorList& params);
};

// One bias-corrected Adam update, elementwise over every tensor. Throws
// ShapeError when params, grads and state do not line up.
void adam_step(const TensorList& params, const TensorList& grads, AdamState& state, const AdamConfig& config);

}  // namespace evpirank
