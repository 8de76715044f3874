#include "topictax/simd.h"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace topictax::simd {
namespace {

double dot(const double* a, const double* b, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, size_t n) { return dot(a, a, n); }

void axpy(double a, const double* x, double* y, size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  for (; i < n; ++i) x[i] *= a;
}

float64x2_t load_int2(const int32_t* p) { return vcvtq_f64_s64(vmovl_s32(vld1_s32(p))); }

void gibbs_weights(const int32_t* doc_topic, const int32_t* word_topic,
                   const int32_t* topic_total, double alpha, double beta, double vbeta,
                   double* out, size_t k) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vb = vdupq_n_f64(beta);
  const float64x2_t vvb = vdupq_n_f64(vbeta);
  size_t i = 0;
  for (; i + 2 <= k; i += 2) {
    float64x2_t d = vaddq_f64(load_int2(doc_topic + i), va);
    float64x2_t w = vaddq_f64(load_int2(word_topic + i), vb);
    float64x2_t t = vaddq_f64(load_int2(topic_total + i), vvb);
    vst1q_f64(out + i, vdivq_f64(vmulq_f64(d, w), t));
  }
  for (; i < k; ++i) {
    out[i] = (doc_topic[i] + alpha) * (word_topic[i] + beta) / (topic_total[i] + vbeta);
  }
}

void foldin_weights(const int32_t* doc_topic, const double* phi_w, double alpha, double* out,
                    size_t k) {
  const float64x2_t va = vdupq_n_f64(alpha);
  size_t i = 0;
  for (; i + 2 <= k; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vaddq_f64(load_int2(doc_topic + i), va), vld1q_f64(phi_w + i)));
  }
  for (; i < k; ++i) out[i] = (doc_topic[i] + alpha) * phi_w[i];
}

constexpr Kernels kNeon{Isa::kNeon, dot,           sum_squares,   axpy,
                        scale,      gibbs_weights, foldin_weights};

}  // namespace

const Kernels* neon_kernels() { return &kNeon; }

}  // namespace topictax::simd

#else

namespace topictax::simd {
const Kernels* neon_kernels() { return nullptr; }
}  // namespace topictax::simd

#endif
