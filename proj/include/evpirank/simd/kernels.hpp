#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Inner-loop kernels behind every dense operation in the library. Each kernel
// has a scalar reference implementation plus optional AVX2 (x86-64) and NEON
// (aarch64) variants; the widest one the CPU supports is chosen once at
// startup. EVPIRANK_SIMD=scalar|avx2|neon in the environment overrides the pick.
//
// Elementwise kernels (axpy, adam_update) use unfused multiply/add in every
// variant and so agree bit for bit with the scalar reference. Reductions (dot)
// use a different, but fixed, summation order per variant.
namespace evpirank::simd {

enum class Backend { scalar, avx2, neon };

struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double inv_bias1;  // 1 / (1 - beta1^t)
  double inv_bias2;  // 1 / (1 - beta2^t)
};

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*adam_update)(double* param, double* m, double* v, const double* grad, std::size_t n,
                      const AdamCoefficients& c);
};

std::string_view backend_name(Backend backend);

bool backend_available(Backend backend);

std::vector<Backend> available_backends();

// Kernel table of one specific backend; throws UsageError when unavailable.
const KernelTable& kernels_for(Backend backend);

// Currently selected kernels.
const KernelTable& kernels();

Backend active_backend();

// Switches the process-wide backend. Not thread-safe against concurrent
// kernel calls; meant for tests and start-up configuration.
void set_backend(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(EVPIRANK_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(EVPIRANK_HAVE_NEON_KERNELS)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace evpirank::simd
