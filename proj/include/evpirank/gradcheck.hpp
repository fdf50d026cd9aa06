#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "evpirank/rng.hpp"
#include "evpirank/tensor.hpp"

namespace evpirank {

// Evaluates the loss at the current parameter values. When `grads` is
// non-null it also accumulates the analytic gradient into it (the tensors are
// zeroed by the caller and shaped like the parameters).
using LossFunction = std::function<double(const TensorList* grads)>;

struct GradProbe {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<GradProbe> probes;
};

inline constexpr double kGradCheckStep = 1e-5;

// Compares analytic gradients with central differences
// (f(x + h) - f(x - h)) / 2h at `n_probes` uniformly drawn coordinates.
// Relative error is |a - n| / max(1e-8, |a| + |n|). Throws NumericError when
// the loss is not finite. Parameters are restored afterwards.
GradCheckReport grad_check(const LossFunction& loss, const TensorList& params, std::size_t n_probes, Rng& rng,
                           double step = kGradCheckStep);

}  // namespace evpirank
