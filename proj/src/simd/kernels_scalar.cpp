#include <cmath>

#include "evpirank/simd/kernels.hpp"

namespace evpirank::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void adam_update_scalar(double* param, double* m, double* v, const double* grad, std::size_t n,
                        const AdamCoefficients& c) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] * c.inv_bias1;
    const double v_hat = v[i] * c.inv_bias2;
    param[i] = param[i] - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace

const KernelTable kScalarKernels{Backend::scalar, &dot_scalar, &axpy_scalar, &adam_update_scalar};

}  // namespace evpirank::simd::detail
