#include "topictax/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "topictax/errors.h"
#include "topictax/simd.h"

namespace topictax::linalg {

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix dimensions do not agree");
  const auto& k = simd::kernels();
  Matrix bt = b.transposed();
  Matrix c(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < b.cols(); ++j) c(i, j) = k.dot(a.row(i).data(), bt.row(j).data(), a.cols());
  }
  return c;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tol, int max_sweeps) {
  const size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw ValidationError("jacobi_eigen needs a square matrix");
  Matrix a = symmetric;
  Matrix v(n, n);
  for (size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob2 = 0.0;
  for (double x : a.data()) frob2 += x * x;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off == 0.0 || off <= tol * tol * frob2) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.vectors = Matrix(n, n);
  for (size_t i = 0; i < n; ++i) {
    size_t col = order[i];
    out.values.push_back(a(col, col));
    double sign = 1.0;
    for (size_t k = 0; k < n; ++k) {
      if (std::abs(v(k, col)) > 1e-12) {
        sign = v(k, col) < 0 ? -1.0 : 1.0;
        break;
      }
    }
    for (size_t k = 0; k < n; ++k) out.vectors(i, k) = sign * v(k, col);
  }
  return out;
}

size_t orthonormalize_rows(Matrix& m, double drop_tol) {
  const auto& k = simd::kernels();
  const size_t len = m.cols();
  size_t kept = 0;
  std::vector<bool> live(m.rows(), false);
  for (size_t i = 0; i < m.rows(); ++i) {
    double* ri = m.row(i).data();
    double orig = std::sqrt(k.sum_squares(ri, len));
    if (orig == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t j = 0; j < i; ++j) {
        if (!live[j]) continue;
        const double* rj = m.row(j).data();
        k.axpy(-k.dot(ri, rj, len), rj, ri, len);
      }
    }
    double norm = std::sqrt(k.sum_squares(ri, len));
    if (norm <= drop_tol * orig) {
      std::fill(m.row(i).begin(), m.row(i).end(), 0.0);
      continue;
    }
    k.scale(1.0 / norm, ri, len);
    live[i] = true;
    ++kept;
  }
  return kept;
}

namespace {

// Rows of w become mutually orthogonal; the same rotations accumulate in r.
void one_sided_jacobi(Matrix& w, Matrix& r) {
  const auto& k = simd::kernels();
  const size_t l = w.rows();
  const size_t len = w.cols();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (size_t p = 0; p < l; ++p) {
      for (size_t q = p + 1; q < l; ++q) {
        double* wp = w.row(p).data();
        double* wq = w.row(q).data();
        double alpha = k.sum_squares(wp, len);
        double beta = k.sum_squares(wq, len);
        double gamma = k.dot(wp, wq, len);
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        auto rotate = [&](double* x, double* y, size_t n) {
          for (size_t i = 0; i < n; ++i) {
            double xi = x[i], yi = y[i];
            x[i] = c * xi - s * yi;
            y[i] = s * xi + c * yi;
          }
        };
        rotate(wp, wq, len);
        rotate(r.row(p).data(), r.row(q).data(), l);
      }
    }
    if (!rotated) return;
  }
}

}  // namespace

TruncatedSvd truncated_svd(const Matrix& a, const SvdOptions& options) {
  const auto& kern = simd::kernels();
  const size_t m = a.rows();
  const size_t n = a.cols();
  const size_t full = std::min(m, n);
  const size_t want = options.rank;
  if (want == 0) throw ValidationError("truncated_svd: rank must be >= 1");
  const size_t l = std::min(want + options.oversampling, full);

  TruncatedSvd out;
  out.singular_values.assign(want, 0.0);
  out.left = Matrix(want, m);
  out.right = Matrix(want, n);
  if (l == 0) return out;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix omega(l, n);
  for (double& x : omega.data()) x = gauss(rng);

  auto project_rows = [&](const Matrix& basis_n) {  // (l x n) -> (l x m): A * basis^T
    Matrix y(basis_n.rows(), m);
    for (size_t j = 0; j < basis_n.rows(); ++j) {
      for (size_t i = 0; i < m; ++i) y(j, i) = kern.dot(a.row(i).data(), basis_n.row(j).data(), n);
    }
    return y;
  };
  auto project_cols = [&](const Matrix& basis_m) {  // (l x m) -> (l x n): basis * A
    Matrix z(basis_m.rows(), n);
    for (size_t j = 0; j < basis_m.rows(); ++j) {
      double* zj = z.row(j).data();
      for (size_t i = 0; i < m; ++i) {
        double coeff = basis_m(j, i);
        if (coeff != 0.0) kern.axpy(coeff, a.row(i).data(), zj, n);
      }
    }
    return z;
  };

  Matrix q = project_rows(omega);
  orthonormalize_rows(q);
  for (int it = 0; it < options.power_iters; ++it) {
    Matrix z = project_cols(q);
    orthonormalize_rows(z);
    q = project_rows(z);
    orthonormalize_rows(q);
  }

  Matrix b = project_cols(q);
  Matrix r(l, l);
  for (size_t i = 0; i < l; ++i) r(i, i) = 1.0;
  one_sided_jacobi(b, r);

  std::vector<double> sigma(l);
  for (size_t j = 0; j < l; ++j) sigma[j] = std::sqrt(kern.sum_squares(b.row(j).data(), n));
  std::vector<size_t> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return sigma[x] > sigma[y]; });
  const double sigma_max = sigma[order[0]];

  for (size_t c = 0; c < std::min(want, l); ++c) {
    size_t j = order[c];
    if (sigma[j] <= 1e-13 * sigma_max || sigma[j] == 0.0) break;
    out.singular_values[c] = sigma[j];
    auto right = out.right.row(c);
    for (size_t x = 0; x < n; ++x) right[x] = b(j, x) / sigma[j];
    double* left = out.left.row(c).data();
    for (size_t i = 0; i < l; ++i) {
      if (r(j, i) != 0.0) kern.axpy(r(j, i), q.row(i).data(), left, m);
    }
  }
  return out;
}

}  // namespace topictax::linalg
