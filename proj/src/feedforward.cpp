#include "evpirank/feedforward.hpp"

#include <cmath>

#include "evpirank/error.hpp"

namespace evpirank {

FeedForwardParams FeedForwardParams::zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t hidden_layers,
                                           std::size_t output_dim) {
  FeedForwardParams p;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    p.weights.emplace_back(hidden_dim, in);
    p.biases.emplace_back(hidden_dim, 1);
    in = hidden_dim;
  }
  p.weights.emplace_back(output_dim, in);
  p.biases.emplace_back(output_dim, 1);
  return p;
}

void FeedForwardParams::init_uniform(Rng& rng, double scale) {
  for (auto& w : weights) {
    for (double& v : w.values()) v = rng.uniform(-scale, scale);
  }
  for (auto& b : biases) b.fill(0.0);
}

void FeedForwardParams::init_glorot(Rng& rng) {
  for (auto& w : weights) {
    const double scale = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& v : w.values()) v = rng.uniform(-scale, scale);
  }
  for (auto& b : biases) b.fill(0.0);
}

void FeedForwardParams::collect(const std::string& prefix, TensorList& out) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back({prefix + "." + std::to_string(l) + ".W", &weights[l]});
    out.push_back({prefix + "." + std::to_string(l) + ".b", &biases[l]});
  }
}

Vector feedforward(const FeedForwardParams& p, std::span<const double> input, FeedForwardTrace* trace) {
  if (p.weights.empty()) throw ShapeError("feedforward: no layers");
  if (input.size() != p.input_dim()) {
    throw ShapeError("feedforward: input length " + std::to_string(input.size()) + ", expected " +
                     std::to_string(p.input_dim()));
  }
  if (trace) {
    trace->activations.clear();
    trace->activations.emplace_back(input.begin(), input.end());
  }
  Vector current(input.begin(), input.end());
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Vector next(p.weights[l].rows());
    affine(p.weights[l], current, p.biases[l].values(), next);
    if (l + 1 < p.weights.size()) {
      for (double& v : next) v = std::tanh(v);
      if (trace) trace->activations.push_back(next);
    }
    current = std::move(next);
  }
  return current;
}

Vector feedforward_backward(const FeedForwardParams& p, const FeedForwardTrace& trace, std::span<const double> d_output,
                            FeedForwardParams& grads) {
  if (trace.activations.size() != p.weights.size()) throw ShapeError("feedforward_backward: trace does not match");
  if (d_output.size() != p.output_dim()) throw ShapeError("feedforward_backward: gradient length mismatch");
  Vector dz(d_output.begin(), d_output.end());
  for (std::size_t l = p.weights.size(); l-- > 0;) {
    const Vector& a = trace.activations[l];
    outer_accumulate(dz, a, grads.weights[l]);
    auto gb = grads.biases[l].values();
    for (std::size_t k = 0; k < dz.size(); ++k) gb[k] += dz[k];
    Vector da(a.size(), 0.0);
    gemv_transposed_accumulate(p.weights[l], dz, da);
    if (l > 0) {
      for (std::size_t k = 0; k < da.size(); ++k) da[k] *= 1.0 - a[k] * a[k];
    }
    dz = std::move(da);
  }
  return dz;
}

}  // namespace evpirank
