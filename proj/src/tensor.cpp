#include "evpirank/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "evpirank/error.hpp"
#include "evpirank/simd/kernels.hpp"

namespace evpirank {

void DenseMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void affine(const DenseMatrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  if (x.size() != w.cols() || y.size() != w.rows() || (!b.empty() && b.size() != w.rows())) {
    throw ShapeError("affine: shape mismatch");
  }
  const auto& k = simd::kernels();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double s = k.dot(w.row(r).data(), x.data(), x.size());
    y[r] = b.empty() ? s : s + b[r];
  }
}

void gemv_accumulate(const DenseMatrix& w, std::span<const double> x, std::span<double> y) {
  if (x.size() != w.cols() || y.size() != w.rows()) throw ShapeError("gemv: shape mismatch");
  const auto& k = simd::kernels();
  for (std::size_t r = 0; r < w.rows(); ++r) y[r] += k.dot(w.row(r).data(), x.data(), x.size());
}

void gemv_transposed_accumulate(const DenseMatrix& w, std::span<const double> dy, std::span<double> dx) {
  if (dy.size() != w.rows() || dx.size() != w.cols()) throw ShapeError("gemv_t: shape mismatch");
  const auto& k = simd::kernels();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    if (dy[r] != 0.0) k.axpy(dy[r], w.row(r).data(), dx.data(), dx.size());
  }
}

void outer_accumulate(std::span<const double> dy, std::span<const double> x, DenseMatrix& g) {
  if (dy.size() != g.rows() || x.size() != g.cols()) throw ShapeError("outer: shape mismatch");
  const auto& k = simd::kernels();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    if (dy[r] != 0.0) k.axpy(dy[r], x.data(), g.row(r).data(), x.size());
  }
}

void add_into(const DenseMatrix& x, DenseMatrix& y) {
  if (!x.same_shape(y)) throw ShapeError("add_into: shape mismatch");
  simd::kernels().axpy(1.0, x.values().data(), y.values().data(), x.size());
}

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

void check_same_structure(const TensorList& a, const TensorList& b) {
  if (a.size() != b.size()) throw ShapeError("tensor lists differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].tensor->same_shape(*b[i].tensor)) {
      throw ShapeError("tensor shape mismatch at " + a[i].name);
    }
  }
}

void zero_all(const TensorList& tensors) {
  for (const auto& t : tensors) t.tensor->fill(0.0);
}

std::size_t parameter_count(const TensorList& tensors) {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.tensor->size();
  return n;
}

}  // namespace evpirank
