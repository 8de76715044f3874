#include "topictax/simd.h"

namespace topictax::simd {
namespace {

double dot(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, size_t n) { return dot(a, a, n); }

void axpy(double a, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void gibbs_weights(const int32_t* doc_topic, const int32_t* word_topic,
                   const int32_t* topic_total, double alpha, double beta, double vbeta,
                   double* out, size_t k) {
  for (size_t i = 0; i < k; ++i) {
    out[i] = (doc_topic[i] + alpha) * (word_topic[i] + beta) / (topic_total[i] + vbeta);
  }
}

void foldin_weights(const int32_t* doc_topic, const double* phi_w, double alpha, double* out,
                    size_t k) {
  for (size_t i = 0; i < k; ++i) out[i] = (doc_topic[i] + alpha) * phi_w[i];
}

constexpr Kernels kScalar{Isa::kScalar, dot,           sum_squares,   axpy,
                          scale,        gibbs_weights, foldin_weights};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace topictax::simd
