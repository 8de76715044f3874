#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "support/svd_oracle.h"
#include "topictax/linalg.h"

using namespace topictax::linalg;
using namespace topictax::testing;

TEST_CASE("jacobi_eigen agrees with a dense solver") {
  std::mt19937 rng(4);
  std::normal_distribution<double> gauss;
  for (size_t n : {1u, 2u, 3u, 6u, 12u}) {
    Matrix m(n, n);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i; j < n; ++j) m(i, j) = m(j, i) = gauss(rng);
    }
    auto eig = jacobi_eigen(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(m));
    for (size_t i = 0; i < n; ++i) {
      CHECK(eig.values[i] == doctest::Approx(ref.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i))).epsilon(1e-12));
      // M v = lambda v
      for (size_t r = 0; r < n; ++r) {
        double mv = 0.0;
        for (size_t c = 0; c < n; ++c) mv += m(r, c) * eig.vectors(i, c);
        CHECK(std::abs(mv - eig.values[i] * eig.vectors(i, r)) < 1e-10);
      }
    }
  }
}

TEST_CASE("truncated_svd singular values match the Gram oracle on random 20x30 counts") {
  for (uint32_t seed = 1; seed <= 5; ++seed) {
    Matrix a = random_counts(20, 30, seed);
    auto oracle = gram_singular_values(a);
    SvdOptions opts;
    opts.rank = 20;
    opts.seed = seed;
    auto svd = truncated_svd(a, opts);
    for (size_t i = 0; i < 20; ++i) CHECK(std::abs(svd.singular_values[i] - oracle[i]) < 1e-8);
    CHECK(reconstruction_error(a, svd) < 1e-8);

    // Partial rank is a randomized approximation: only a loose bound holds.
    opts.rank = 8;
    auto top = truncated_svd(a, opts);
    for (size_t i = 0; i < 8; ++i) CHECK(std::abs(top.singular_values[i] - oracle[i]) < 1e-2 * oracle[i]);
  }
}

TEST_CASE("truncated_svd output structure") {
  Matrix a = random_counts(25, 15, 9);
  SvdOptions opts;
  opts.rank = 10;
  opts.oversampling = 3;
  opts.power_iters = 3;
  auto svd = truncated_svd(a, opts);
  for (size_t i = 1; i < svd.singular_values.size(); ++i) {
    CHECK(svd.singular_values[i] <= svd.singular_values[i - 1]);
  }
  for (size_t i = 0; i < 10; ++i) {
    for (size_t j = 0; j < 10; ++j) {
      double d = 0.0;
      for (size_t c = 0; c < a.cols(); ++c) d += svd.right(i, c) * svd.right(j, c);
      CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("truncated_svd on rank-deficient input pads with zero components") {
  // Rank 2: every row is a combination of two fixed rows.
  Matrix a(10, 6);
  for (size_t i = 0; i < 10; ++i) {
    for (size_t j = 0; j < 6; ++j) a(i, j) = (i + 1.0) * (j % 2) + (i % 3) * (j + 1.0);
  }
  SvdOptions opts;
  opts.rank = 5;
  auto svd = truncated_svd(a, opts);
  CHECK(svd.singular_values[0] > 0);
  CHECK(svd.singular_values[1] > 0);
  for (size_t i = 2; i < 5; ++i) CHECK(svd.singular_values[i] == 0.0);
  CHECK(reconstruction_error(a, svd) < 1e-9);
}

TEST_CASE("rank-1 input: first right vector is parallel to the nonzero row") {
  Matrix a(4, 5);
  double row[5] = {0.0, 0.5, 0.0, 2.0, 1.0};
  for (size_t j = 0; j < 5; ++j) a(2, j) = row[j];
  SvdOptions opts;
  opts.rank = 1;
  auto svd = truncated_svd(a, opts);
  double norm = std::sqrt(0.25 + 4.0 + 1.0);
  CHECK(svd.singular_values[0] == doctest::Approx(norm));
  double cos = 0.0;
  for (size_t j = 0; j < 5; ++j) cos += svd.right(0, j) * row[j] / norm;
  CHECK(std::abs(std::abs(cos) - 1.0) < 1e-12);
}

TEST_CASE("orthonormalize_rows drops dependent rows") {
  Matrix m(3, 3);
  m(0, 0) = 1;
  m(1, 0) = 2;
  m(2, 1) = 3;
  CHECK(orthonormalize_rows(m) == 2);
  CHECK(m(1, 0) == 0.0);
  CHECK(m(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("multiply") {
  Matrix a(2, 3), b(3, 2);
  for (size_t i = 0; i < 6; ++i) {
    a.data()[i] = static_cast<double>(i + 1);
    b.data()[i] = static_cast<double>(6 - i);
  }
  Matrix c = multiply(a, b);
  CHECK(c(0, 0) == 1 * 6 + 2 * 4 + 3 * 2);
  CHECK(c(1, 1) == 4 * 5 + 5 * 3 + 6 * 1);
}
