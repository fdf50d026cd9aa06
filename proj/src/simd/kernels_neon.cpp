#include <arm_neon.h>

#include <cmath>

#include "evpirank/simd/kernels.hpp"

namespace evpirank::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void adam_update_neon(double* param, double* m, double* v, const double* grad, std::size_t n,
                      const AdamCoefficients& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t nb1 = vdupq_n_f64(one_minus_b1);
  const float64x2_t nb2 = vdupq_n_f64(one_minus_b2);
  const float64x2_t ib1 = vdupq_n_f64(c.inv_bias1);
  const float64x2_t ib2 = vdupq_n_f64(c.inv_bias2);
  const float64x2_t lr = vdupq_n_f64(c.lr);
  const float64x2_t eps = vdupq_n_f64(c.eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(nb1, g));
    const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(nb2, vmulq_f64(g, g)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, vmulq_f64(mi, ib1)),
                                       vaddq_f64(vsqrtq_f64(vmulq_f64(vi, ib2)), eps));
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    param[i] = param[i] - c.lr * (m[i] * c.inv_bias1) / (std::sqrt(v[i] * c.inv_bias2) + c.eps);
  }
}

}  // namespace

const KernelTable kNeonKernels{Backend::neon, &dot_neon, &axpy_neon, &adam_update_neon};

}  // namespace evpirank::simd::detail
