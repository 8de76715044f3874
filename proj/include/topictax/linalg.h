#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace topictax::linalg {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // row i is the eigenvector for values[i]
};

// Cyclic Jacobi rotations; intended for small dense matrices. Each
// eigenvector is sign-normalized so its first entry of magnitude > 1e-12 is
// positive.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tol = 1e-15, int max_sweeps = 100);

struct SvdOptions {
  size_t rank = 0;
  size_t oversampling = 10;
  int power_iters = 2;
  uint64_t seed = 1;
};

// A ~= U_t^T diag(S) Vt. Left and right singular vectors are stored as rows.
struct TruncatedSvd {
  std::vector<double> singular_values;  // non-increasing
  Matrix left;                          // rank x rows(A)
  Matrix right;                         // rank x cols(A)
};

// Randomized range finder with power iterations, then a one-sided Jacobi
// SVD of the small projected matrix. Exact (to rounding) when
// rank + oversampling >= min(rows, cols). Components beyond the numerical
// rank come back with singular value 0 and zero vectors.
TruncatedSvd truncated_svd(const Matrix& a, const SvdOptions& options);

// Modified Gram-Schmidt on rows, applied twice. Rows that collapse below
// drop_tol relative to their input norm are zeroed. Returns the number of
// nonzero rows kept.
size_t orthonormalize_rows(Matrix& m, double drop_tol = 1e-10);

}  // namespace topictax::linalg
