#include "evpirank/optim.hpp"

#include <cmath>

#include "evpirank/error.hpp"
#include "evpirank/simd/kernels.hpp"

namespace evpirank {

AdamState AdamState::for_params(const TensorList& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.tensor->size(), 0.0);
    s.v.emplace_back(p.tensor->size(), 0.0);
  }
  return s;
}

void adam_step(const TensorList& params, const TensorList& grads, AdamState& state, const AdamConfig& config) {
  check_same_structure(params, grads);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state does not match parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const simd::AdamCoefficients c{config.lr,
                                 config.beta1,
                                 config.beta2,
                                 config.eps,
                                 1.0 / (1.0 - std::pow(config.beta1, t)),
                                 1.0 / (1.0 - std::pow(config.beta2, t))};
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].tensor->values();
    const auto g = grads[i].tensor->values();
    if (state.m[i].size() != p.size()) throw ShapeError("adam_step: state shape mismatch at " + params[i].name);
    k.adam_update(p.data(), state.m[i].data(), state.v[i].data(), g.data(), p.size(), c);
  }
}

}  // namespace evpirank
