#pragma once

// Dense-solver oracles for the SVD suites.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "topictax/linalg.h"

namespace topictax::testing {

using linalg::Matrix;
using linalg::TruncatedSvd;

inline Matrix random_counts(size_t rows, size_t cols, uint32_t seed) {
  std::mt19937 rng(seed);
  std::poisson_distribution<int> pois(2.0);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = pois(rng);
  return m;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (size_t r = 0; r < m.rows(); ++r) {
    for (size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  }
  return e;
}

// Oracle: square roots of the Gram matrix eigenvalues, descending.
inline std::vector<double> gram_singular_values(const Matrix& a) {
  Eigen::MatrixXd e = to_eigen(a);
  Eigen::MatrixXd gram = a.rows() <= a.cols() ? Eigen::MatrixXd(e * e.transpose())
                                               : Eigen::MatrixXd(e.transpose() * e);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  std::vector<double> out;
  for (Eigen::Index i = solver.eigenvalues().size() - 1; i >= 0; --i) {
    out.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()(i))));
  }
  return out;
}

inline double reconstruction_error(const Matrix& a, const TruncatedSvd& svd) {
  double err2 = 0.0;
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < a.cols(); ++j) {
      double approx = 0.0;
      for (size_t c = 0; c < svd.singular_values.size(); ++c) {
        approx += svd.left(c, i) * svd.singular_values[c] * svd.right(c, j);
      }
      err2 += (a(i, j) - approx) * (a(i, j) - approx);
    }
  }
  return std::sqrt(err2);
}

}  // namespace topictax::testing
