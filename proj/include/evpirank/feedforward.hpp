#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evpirank/rng.hpp"
#include "evpirank/tensor.hpp"

namespace evpirank {

// Multi-layer perceptron: tanh on every hidden layer, linear output layer.
// `weights[l]` is out x in, `biases[l]` is out x 1.
struct FeedForwardParams {
  std::vector<DenseMatrix> weights;
  std::vector<DenseMatrix> biases;

  // hidden_layers hidden layers of width hidden_dim, so hidden_layers + 1
  // affine maps in total.
  static FeedForwardParams zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t hidden_layers,
                                 std::size_t output_dim);

  void init_uniform(Rng& rng, double scale = 0.08);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  void init_glorot(Rng& rng);

  std::size_t input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
  std::size_t output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }
  std::size_t hidden_layers() const { return weights.empty() ? 0 : weights.size() - 1; }

  void collect(const std::string& prefix, TensorList& out);
};

struct FeedForwardTrace {
  std::vector<Vector> activations;  // [0] = input, [l] = tanh output of hidden layer l
};

Vector feedforward(const FeedForwardParams& params, std::span<const double> input, FeedForwardTrace* trace = nullptr);

// Accumulates parameter gradients and returns dLoss/dinput.
Vector feedforward_backward(const FeedForwardParams& params, const FeedForwardTrace& trace,
                            std::span<const double> d_output, FeedForwardParams& grads);

}  // namespace evpirank
