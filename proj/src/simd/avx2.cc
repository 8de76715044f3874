#include "topictax/simd.h"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

namespace topictax::simd {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, size_t n) { return dot(a, a, n); }

void axpy(double a, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= a;
}

__m256d load_int4(const int32_t* p) {
  return _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

void gibbs_weights(const int32_t* doc_topic, const int32_t* word_topic,
                   const int32_t* topic_total, double alpha, double beta, double vbeta,
                   double* out, size_t k) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vvb = _mm256_set1_pd(vbeta);
  size_t i = 0;
  for (; i + 4 <= k; i += 4) {
    __m256d d = _mm256_add_pd(load_int4(doc_topic + i), va);
    __m256d w = _mm256_add_pd(load_int4(word_topic + i), vb);
    __m256d t = _mm256_add_pd(load_int4(topic_total + i), vvb);
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_mul_pd(d, w), t));
  }
  for (; i < k; ++i) {
    out[i] = (doc_topic[i] + alpha) * (word_topic[i] + beta) / (topic_total[i] + vbeta);
  }
}

void foldin_weights(const int32_t* doc_topic, const double* phi_w, double alpha, double* out,
                    size_t k) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= k; i += 4) {
    __m256d d = _mm256_add_pd(load_int4(doc_topic + i), va);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, _mm256_loadu_pd(phi_w + i)));
  }
  for (; i < k; ++i) out[i] = (doc_topic[i] + alpha) * phi_w[i];
}

constexpr Kernels kAvx2{Isa::kAvx2, dot,           sum_squares,   axpy,
                        scale,      gibbs_weights, foldin_weights};

}  // namespace

const Kernels* avx2_kernels() { return &kAvx2; }

}  // namespace topictax::simd

#else

namespace topictax::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace topictax::simd

#endif
