#include "evpirank/lstm.hpp"

#include <cmath>

#include "evpirank/error.hpp"

namespace evpirank {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  for (DenseMatrix* w : {&p.w_i, &p.w_f, &p.w_o, &p.w_g}) *w = DenseMatrix(hidden_dim, input_dim);
  for (DenseMatrix* u : {&p.u_i, &p.u_f, &p.u_o, &p.u_g}) *u = DenseMatrix(hidden_dim, hidden_dim);
  for (DenseMatrix* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_g}) *b = DenseMatrix(hidden_dim, 1);
  return p;
}

void LstmParams::init_uniform(Rng& rng, double scale) {
  for (DenseMatrix* m : {&w_i, &w_f, &w_o, &w_g, &u_i, &u_f, &u_o, &u_g}) {
    for (double& v : m->values()) v = rng.uniform(-scale, scale);
  }
  for (DenseMatrix* b : {&b_i, &b_o, &b_g}) b->fill(0.0);
  b_f.fill(1.0);
}

void LstmParams::collect(const std::string& prefix, TensorList& out) {
  out.push_back({prefix + ".W_i", &w_i});
  out.push_back({prefix + ".W_f", &w_f});
  out.push_back({prefix + ".W_o", &w_o});
  out.push_back({prefix + ".W_g", &w_g});
  out.push_back({prefix + ".U_i", &u_i});
  out.push_back({prefix + ".U_f", &u_f});
  out.push_back({prefix + ".U_o", &u_o});
  out.push_back({prefix + ".U_g", &u_g});
  out.push_back({prefix + ".b_i", &b_i});
  out.push_back({prefix + ".b_f", &b_f});
  out.push_back({prefix + ".b_o", &b_o});
  out.push_back({prefix + ".b_g", &b_g});
}

Vector encode_sequence(const LstmParams& p, const TokenSequence& inputs, LstmTrace* trace) {
  const std::size_t hd = p.hidden_dim;
  Vector mean(hd, 0.0);
  if (inputs.empty()) {
    if (trace) *trace = LstmTrace{};
    return mean;
  }
  if (trace) {
    *trace = LstmTrace{};
    trace->inputs = inputs;
  }
  Vector h(hd, 0.0), c(hd, 0.0);
  Vector zi(hd), zf(hd), zo(hd), zg(hd);
  for (const auto& x : inputs) {
    if (x.size() != p.input_dim) {
      throw ShapeError("encode_sequence: token vector has length " + std::to_string(x.size()) + ", expected " +
                       std::to_string(p.input_dim));
    }
    affine(p.w_i, x, p.b_i.values(), zi);
    affine(p.w_f, x, p.b_f.values(), zf);
    affine(p.w_o, x, p.b_o.values(), zo);
    affine(p.w_g, x, p.b_g.values(), zg);
    gemv_accumulate(p.u_i, h, zi);
    gemv_accumulate(p.u_f, h, zf);
    gemv_accumulate(p.u_o, h, zo);
    gemv_accumulate(p.u_g, h, zg);
    Vector tc(hd);
    for (std::size_t k = 0; k < hd; ++k) {
      zi[k] = sigmoid(zi[k]);
      zf[k] = sigmoid(zf[k]);
      zo[k] = sigmoid(zo[k]);
      zg[k] = std::tanh(zg[k]);
      c[k] = zf[k] * c[k] + zi[k] * zg[k];
      tc[k] = std::tanh(c[k]);
      h[k] = zo[k] * tc[k];
      mean[k] += h[k];
    }
    if (trace) {
      trace->i.push_back(zi);
      trace->f.push_back(zf);
      trace->o.push_back(zo);
      trace->g.push_back(zg);
      trace->c.push_back(c);
      trace->tanh_c.push_back(std::move(tc));
      trace->h.push_back(h);
    }
  }
  const double inv_t = 1.0 / static_cast<double>(inputs.size());
  for (double& v : mean) v *= inv_t;
  return mean;
}

void encode_sequence_backward(const LstmParams& p, const LstmTrace& trace, std::span<const double> d_output,
                              LstmParams& grads) {
  const std::size_t steps = trace.h.size();
  if (steps == 0) return;
  const std::size_t hd = p.hidden_dim;
  if (d_output.size() != hd) throw ShapeError("encode_sequence_backward: gradient length mismatch");
  const double inv_t = 1.0 / static_cast<double>(steps);
  const Vector zero(hd, 0.0);

  Vector dh_rec(hd, 0.0), dc_next(hd, 0.0);
  Vector dzi(hd), dzf(hd), dzo(hd), dzg(hd);
  for (std::size_t s = steps; s-- > 0;) {
    const Vector& c_prev = s > 0 ? trace.c[s - 1] : zero;
    const Vector& h_prev = s > 0 ? trace.h[s - 1] : zero;
    const Vector& ig = trace.i[s];
    const Vector& fg = trace.f[s];
    const Vector& og = trace.o[s];
    const Vector& gg = trace.g[s];
    const Vector& tc = trace.tanh_c[s];
    for (std::size_t k = 0; k < hd; ++k) {
      const double dh = d_output[k] * inv_t + dh_rec[k];
      const double dc = dh * og[k] * (1.0 - tc[k] * tc[k]) + dc_next[k];
      dzo[k] = dh * tc[k] * og[k] * (1.0 - og[k]);
      dzi[k] = dc * gg[k] * ig[k] * (1.0 - ig[k]);
      dzg[k] = dc * ig[k] * (1.0 - gg[k] * gg[k]);
      dzf[k] = dc * c_prev[k] * fg[k] * (1.0 - fg[k]);
      dc_next[k] = dc * fg[k];
    }
    const auto x = trace.inputs[s];
    outer_accumulate(dzi, x, grads.w_i);
    outer_accumulate(dzf, x, grads.w_f);
    outer_accumulate(dzo, x, grads.w_o);
    outer_accumulate(dzg, x, grads.w_g);
    outer_accumulate(dzi, h_prev, grads.u_i);
    outer_accumulate(dzf, h_prev, grads.u_f);
    outer_accumulate(dzo, h_prev, grads.u_o);
    outer_accumulate(dzg, h_prev, grads.u_g);
    for (std::size_t k = 0; k < hd; ++k) {
      grads.b_i(k, 0) += dzi[k];
      grads.b_f(k, 0) += dzf[k];
      grads.b_o(k, 0) += dzo[k];
      grads.b_g(k, 0) += dzg[k];
    }
    std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
    gemv_transposed_accumulate(p.u_i, dzi, dh_rec);
    gemv_transposed_accumulate(p.u_f, dzf, dh_rec);
    gemv_transposed_accumulate(p.u_o, dzo, dh_rec);
    gemv_transposed_accumulate(p.u_g, dzg, dh_rec);
  }
}

}  // namespace evpirank
