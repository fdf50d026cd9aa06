#include <atomic>
#include <cstdlib>
#include <string>

#include "evpirank/error.hpp"
#include "evpirank/simd/kernels.hpp"

namespace evpirank::simd {
namespace {

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(EVPIRANK_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(EVPIRANK_HAVE_NEON_KERNELS)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return &detail::kScalarKernels;
    case Backend::avx2:
#if defined(EVPIRANK_HAVE_AVX2_KERNELS)
      return &detail::kAvx2Kernels;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(EVPIRANK_HAVE_NEON_KERNELS)
      return &detail::kNeonKernels;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* forced = std::getenv("EVPIRANK_SIMD")) {
    const std::string name(forced);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (name == backend_name(b) && backend_available(b)) return table_for(b);
    }
  }
  for (Backend b : {Backend::avx2, Backend::neon}) {
    if (backend_available(b)) return table_for(b);
  }
  return &detail::kScalarKernels;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) {
  return table_for(backend) != nullptr && cpu_supports(backend);
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (backend_available(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& kernels_for(Backend backend) {
  if (!backend_available(backend)) {
    throw UsageError("SIMD backend not available on this machine: " + std::string(backend_name(backend)));
  }
  return *table_for(backend);
}

const KernelTable& kernels() { return *active_table().load(std::memory_order_relaxed); }

Backend active_backend() { return kernels().backend; }

void set_backend(Backend backend) {
  active_table().store(&kernels_for(backend), std::memory_order_relaxed);
}

}  // namespace evpirank::simd
