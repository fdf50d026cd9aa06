#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "evpirank/checkpoint.hpp"
#include "evpirank/error.hpp"
#include "evpirank/feedforward.hpp"
#include "evpirank/gradcheck.hpp"
#include "evpirank/lstm.hpp"
#include "evpirank/optim.hpp"
#include "evpirank/tensor.hpp"

namespace evpirank {
namespace {

// ---- tensor ops -----------------------------------------------------------

TEST(Tensor, AffineAndTransposedProducts) {
  DenseMatrix w(2, 3);
  double v = 1.0;
  for (double& x : w.values()) x = v++;  // [[1 2 3] [4 5 6]]
  const Vector x{1.0, 0.0, -1.0};
  const Vector b{0.5, -0.5};
  Vector y(2);
  affine(w, x, b, y);
  EXPECT_EQ(y, (Vector{-1.5, -2.5}));
  Vector dx(3, 0.0);
  gemv_transposed_accumulate(w, Vector{1.0, 1.0}, dx);
  EXPECT_EQ(dx, (Vector{5.0, 7.0, 9.0}));
  DenseMatrix g(2, 3);
  outer_accumulate(Vector{1.0, 2.0}, x, g);
  EXPECT_EQ(g(1, 0), 2.0);
  EXPECT_EQ(g(1, 2), -2.0);
  EXPECT_DOUBLE_EQ(norm(Vector{3.0, 4.0}), 5.0);
}

TEST(Tensor, ShapeMismatchesThrow) {
  DenseMatrix w(2, 3);
  Vector y(2), bad(2);
  EXPECT_THROW(affine(w, bad, {}, y), ShapeError);
  Vector three(3);
  EXPECT_THROW(gemv_accumulate(w, Vector(3), three), ShapeError);
  DenseMatrix a(2, 2), b(2, 3);
  EXPECT_THROW(add_into(a, b), ShapeError);
  TensorList la{{"a", &a}}, lb{{"a", &b}};
  EXPECT_THROW(check_same_structure(la, lb), ShapeError);
}

// ---- LSTM -----------------------------------------------------------------

LstmParams one_dim_gates_open() {
  LstmParams p = LstmParams::zeros(1, 1);
  p.b_i(0, 0) = 50.0;
  p.b_o(0, 0) = 50.0;
  p.w_g(0, 0) = 1.0;
  return p;
}

TEST(Lstm, ZeroParamsGiveZeroOutput) {
  const LstmParams p = LstmParams::zeros(3, 4);
  const Vector x{0.3, -2.0, 1.0};
  const auto out = encode_sequence(p, TokenSequence{x, x});
  EXPECT_EQ(out, Vector(4, 0.0));
}

TEST(Lstm, SingleStepHandValue) {
  const Vector x{0.5};
  const auto out = encode_sequence(one_dim_gates_open(), TokenSequence{x});
  // gates saturate at 1, so c = tanh(0.5) and h = tanh(c) = 0.431808
  EXPECT_NEAR(out[0], std::tanh(std::tanh(0.5)), 1e-12);
  EXPECT_NEAR(out[0], 0.4318082, 1e-6);
}

TEST(Lstm, RepeatedInputAccumulatesCellState) {
  const Vector x{0.5};
  const auto once = encode_sequence(one_dim_gates_open(), TokenSequence{x});
  const auto twice = encode_sequence(one_dim_gates_open(), TokenSequence{x, x});
  // forget gate sigmoid(0) = 0.5, so c2 = 0.5 c1 + tanh(0.5)
  const double c1 = std::tanh(0.5);
  const double expected = 0.5 * (std::tanh(c1) + std::tanh(1.5 * c1));
  EXPECT_NEAR(twice[0], expected, 1e-12);
  EXPECT_NE(once[0], twice[0]);
}

TEST(Lstm, EmptySequenceAndShapeErrors) {
  const LstmParams p = LstmParams::zeros(2, 3);
  EXPECT_EQ(encode_sequence(p, {}), Vector(3, 0.0));
  const Vector wrong{1.0};
  EXPECT_THROW(encode_sequence(p, TokenSequence{wrong}), ShapeError);
}

TEST(Lstm, OutputsStrictlyInsideUnitIntervalAndDeterministic) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    LstmParams p = LstmParams::zeros(4, 5);
    p.init_uniform(rng, 3.0);
    std::vector<Vector> storage;
    for (std::size_t t = 0, n = 1 + rng.below(12); t < n; ++t) {
      storage.push_back({rng.normal() * 3, rng.normal() * 3, rng.normal() * 3, rng.normal() * 3});
    }
    const TokenSequence seq(storage.begin(), storage.end());
    const auto out = encode_sequence(p, seq);
    for (double h : out) {
      EXPECT_GT(h, -1.0);
      EXPECT_LT(h, 1.0);
    }
    EXPECT_EQ(out, encode_sequence(p, seq));
  }
}

TEST(Lstm, InitUniformRangeAndForgetBias) {
  Rng rng(1);
  LstmParams p = LstmParams::zeros(6, 7);
  p.init_uniform(rng);
  for (double w : p.w_i.values()) EXPECT_LE(std::abs(w), 0.08);
  for (double w : p.u_g.values()) EXPECT_LE(std::abs(w), 0.08);
  for (double b : p.b_f.values()) EXPECT_EQ(b, 1.0);
  for (double b : p.b_i.values()) EXPECT_EQ(b, 0.0);
}

// ---- feedforward ----------------------------------------------------------

TEST(FeedForward, ZeroWeightsGiveFinalBias) {
  FeedForwardParams p = FeedForwardParams::zeros(3, 4, 5, 2);
  p.biases.back()(0, 0) = 0.25;
  p.biases.back()(1, 0) = -1.0;
  EXPECT_EQ(feedforward(p, Vector{1.0, 2.0, 3.0}), (Vector{0.25, -1.0}));
}

TEST(FeedForward, IdentityLinearLayer) {
  FeedForwardParams p = FeedForwardParams::zeros(2, 2, 0, 2);
  p.weights[0](0, 0) = 1.0;
  p.weights[0](1, 1) = 1.0;
  EXPECT_EQ(feedforward(p, Vector{0.7, -3.0}), (Vector{0.7, -3.0}));
}

TEST(FeedForward, TwoLayerHandValue) {
  FeedForwardParams p = FeedForwardParams::zeros(1, 1, 1, 1);
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 2.0;
  p.biases[1](0, 0) = 1.0;
  EXPECT_NEAR(feedforward(p, Vector{0.5})[0], 1.92423, 1e-5);
}

TEST(FeedForward, ShapesAndErrors) {
  const FeedForwardParams p = FeedForwardParams::zeros(6, 4, 10, 1);
  EXPECT_EQ(p.hidden_layers(), 10u);
  EXPECT_EQ(p.input_dim(), 6u);
  EXPECT_EQ(p.output_dim(), 1u);
  EXPECT_THROW(feedforward(p, Vector(5)), ShapeError);
  EXPECT_THROW(feedforward(FeedForwardParams{}, Vector(1)), ShapeError);
}

TEST(FeedForward, GlorotInitBounds) {
  Rng rng(2);
  FeedForwardParams p = FeedForwardParams::zeros(30, 20, 2, 10);
  p.init_glorot(rng);
  const double first = std::sqrt(6.0 / 50.0);
  for (double w : p.weights[0].values()) EXPECT_LE(std::abs(w), first);
  for (const auto& b : p.biases) {
    for (double x : b.values()) EXPECT_EQ(x, 0.0);
  }
}

TEST(Sigmoid, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_LT(sigmoid(-50.0), 1e-20);
  EXPECT_EQ(sigmoid(50.0), 1.0);
  for (double x : {-30.0, -2.5, -0.1, 0.3, 4.0, 17.0}) EXPECT_NEAR(sigmoid(-x), 1.0 - sigmoid(x), 1e-12);
  EXPECT_LT(sigmoid(1.0), sigmoid(1.0001));
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
}

// ---- Adam -----------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  DenseMatrix w(2, 2, 0.3), g(2, 2, 0.0);
  const TensorList params{{"w", &w}}, grads{{"w", &g}};
  AdamState s = AdamState::for_params(params);
  adam_step(params, grads, s, AdamConfig{});
  EXPECT_EQ(w, DenseMatrix(2, 2, 0.3));
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  DenseMatrix w(1, 2, 1.0), g(1, 2);
  g(0, 0) = 0.5;
  g(0, 1) = -2.0;
  const TensorList params{{"w", &w}}, grads{{"w", &g}};
  AdamState s = AdamState::for_params(params);
  adam_step(params, grads, s, AdamConfig{0.1});
  // m_hat = g, v_hat = g^2, so the step is -lr g / (|g| + eps)
  EXPECT_NEAR(w(0, 0), 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(w(0, 1), 1.0 + 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
}

TEST(Adam, TensorsUpdateIndependently) {
  DenseMatrix a(1, 1, 1.0), b(1, 1, 1.0), ga(1, 1, 1.0), gb(1, 1, 0.0);
  const TensorList params{{"a", &a}, {"b", &b}}, grads{{"a", &ga}, {"b", &gb}};
  AdamState s = AdamState::for_params(params);
  adam_step(params, grads, s, AdamConfig{});
  EXPECT_LT(a(0, 0), 1.0);
  EXPECT_EQ(b(0, 0), 1.0);
}

TEST(Adam, ShapeMismatchThrows) {
  DenseMatrix a(1, 2), g(2, 1);
  const TensorList params{{"a", &a}}, grads{{"a", &g}};
  AdamState s = AdamState::for_params(params);
  EXPECT_THROW(adam_step(params, grads, s, AdamConfig{}), ShapeError);
}

// ---- gradient checking ----------------------------------------------------

TEST(GradCheck, SquareAtThree) {
  DenseMatrix x(1, 1, 3.0);
  const TensorList params{{"x", &x}};
  const LossFunction loss = [&](const TensorList* grads) {
    if (grads) (*grads)[0].tensor->values()[0] += 2.0 * x(0, 0);
    return x(0, 0) * x(0, 0);
  };
  Rng rng(1);
  const auto report = grad_check(loss, params, 3, rng);
  EXPECT_LT(report.max_relative_error, 1e-7);
  ASSERT_FALSE(report.probes.empty());
  EXPECT_EQ(report.probes[0].analytic, 6.0);
  EXPECT_NEAR(report.probes[0].numeric, 6.0, 1e-6);
  EXPECT_EQ(x(0, 0), 3.0);
}

TEST(GradCheck, DoubledGradientGivesOneThird) {
  DenseMatrix x(1, 3);
  x(0, 0) = 0.4;
  x(0, 1) = -1.2;
  x(0, 2) = 2.0;
  const TensorList params{{"x", &x}};
  const LossFunction loss = [&](const TensorList* grads) {
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      total += std::sin(x(0, k));
      if (grads) (*grads)[0].tensor->values()[k] += 2.0 * std::cos(x(0, k));
    }
    return total;
  };
  Rng rng(2);
  EXPECT_NEAR(grad_check(loss, params, 10, rng).max_relative_error, 1.0 / 3.0, 1e-6);
}

TEST(GradCheck, NonFiniteLossThrows) {
  DenseMatrix x(1, 1, 0.0);
  const TensorList params{{"x", &x}};
  const LossFunction loss = [&](const TensorList*) { return std::log(x(0, 0)); };
  Rng rng(3);
  EXPECT_THROW(grad_check(loss, params, 1, rng), NumericError);
}

// ---- checkpoints ----------------------------------------------------------

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(4);
  DenseMatrix a(3, 2), b(4, 1);
  for (double& v : a.values()) v = rng.normal();
  for (double& v : b.values()) v = rng.normal() * 1e-300;
  a(0, 0) = -0.0;
  const TensorList params{{"enc.a", &a}, {"net.b", &b}};
  std::stringstream io;
  save_checkpoint(io, "toy", {{"hidden_dim", "3"}}, params);
  const std::string bytes = io.str();
  EXPECT_EQ(bytes.rfind("EVPIRANK-CKPT v1\nmodel toy\nmeta 1\nhidden_dim 3\ntensors 2\nenc.a 3 2\nnet.b 4 1\ndata\n", 0),
            0u);
  EXPECT_EQ(bytes.size(), bytes.find("data\n") + 5 + 8 * 10);

  const Checkpoint ck = load_checkpoint(io);
  EXPECT_EQ(ck.model, "toy");
  EXPECT_EQ(ck.meta_value("hidden_dim"), "3");
  DenseMatrix a2(3, 2), b2(4, 1);
  ck.restore_into({{"enc.a", &a2}, {"net.b", &b2}});
  EXPECT_EQ(std::memcmp(a.values().data(), a2.values().data(), 6 * sizeof(double)), 0);
  EXPECT_EQ(b, b2);
  std::stringstream again;
  save_checkpoint(again, "toy", {{"hidden_dim", "3"}}, {{"enc.a", &a2}, {"net.b", &b2}});
  EXPECT_EQ(again.str(), bytes);
}

TEST(Checkpoint, RejectsCorruptInput) {
  DenseMatrix a(2, 2, 1.5);
  std::stringstream io;
  save_checkpoint(io, "toy", {}, {{"a", &a}});
  const std::string bytes = io.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(truncated), FormatError);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(load_checkpoint(trailing), FormatError);
  std::istringstream header("EVPIRANK-CKPT v2\n" + bytes.substr(bytes.find('\n') + 1));
  EXPECT_THROW(load_checkpoint(header), FormatError);

  std::istringstream ok(bytes);
  const Checkpoint ck = load_checkpoint(ok);
  DenseMatrix wrong(2, 3);
  EXPECT_THROW(ck.restore_into({{"a", &wrong}}), FormatError);
  DenseMatrix renamed(2, 2);
  EXPECT_THROW(ck.restore_into({{"b", &renamed}}), FormatError);
  EXPECT_THROW(ck.meta_value("missing"), FormatError);
}

TEST(Checkpoint, RejectsNamesWithSpaces) {
  DenseMatrix a(1, 1);
  std::ostringstream out;
  EXPECT_THROW(save_checkpoint(out, "two words", {}, {{"a", &a}}), UsageError);
}

}  // namespace
}  // namespace evpirank
