#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace evpirank {

using Vector = std::vector<double>;

// Row-major dense matrix of doubles. Bias vectors are stored as rows x 1.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Named handle on a parameter tensor owned elsewhere. Parameter structs expose
// their tensors as an ordered list of these; optimizers, checkpoints and the
// gradient checker all walk that list.
struct TensorRef {
  std::string name;
  DenseMatrix* tensor;
};

using TensorList = std::vector<TensorRef>;

// y = W x + b  (b may be empty)
void affine(const DenseMatrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);

// y += W x
void gemv_accumulate(const DenseMatrix& w, std::span<const double> x, std::span<double> y);

// dx += W^T dy
void gemv_transposed_accumulate(const DenseMatrix& w, std::span<const double> dy, std::span<double> dx);

// G += dy x^T
void outer_accumulate(std::span<const double> dy, std::span<const double> x, DenseMatrix& g);

// Elementwise y += x over whole tensors of identical shape.
void add_into(const DenseMatrix& x, DenseMatrix& y);

double norm(std::span<const double> v);

void check_same_structure(const TensorList& a, const TensorList& b);

void zero_all(const TensorList& tensors);

std::size_t parameter_count(const TensorList& tensors);

}  // namespace evpirank
