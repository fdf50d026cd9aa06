#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evpirank/rng.hpp"
#include "evpirank/tensor.hpp"

namespace evpirank {

using TokenSequence = std::vector<std::span<const double>>;

// Single-layer LSTM. Gate order in names: i (input), f (forget), o (output),
// g (candidate).
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  DenseMatrix w_i, w_f, w_o, w_g;  // hidden x input
  DenseMatrix u_i, u_f, u_o, u_g;  // hidden x hidden
  DenseMatrix b_i, b_f, b_o, b_g;  // hidden x 1

  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  // Weights uniform in [-scale, scale], biases zero except the forget gate (+1).
  void init_uniform(Rng& rng, double scale = 0.08);

  void collect(const std::string& prefix, TensorList& out);
};

// Per-step activations kept for backpropagation.
struct LstmTrace {
  TokenSequence inputs;
  std::vector<Vector> i, f, o, g, c, tanh_c, h;
};

double sigmoid(double x);

// Runs the recurrence from h0 = c0 = 0 and returns the mean hidden state.
// An empty sequence returns the zero vector. Throws ShapeError when a token
// vector's length differs from input_dim.
Vector encode_sequence(const LstmParams& params, const TokenSequence& inputs, LstmTrace* trace = nullptr);

// Accumulates dLoss/dparams into `grads` given dLoss/d(mean hidden state).
void encode_sequence_backward(const LstmParams& params, const LstmTrace& trace, std::span<const double> d_output,
                              LstmParams& grads);

}  // namespace evpirank
