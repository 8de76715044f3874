#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel inner loops with one scalar reference implementation and
// ISA-specific variants picked once at runtime.
//
// Elementwise kernels (gibbs_weights, foldin_weights, scale) use only
// correctly rounded IEEE operations in the same order as the scalar code, so
// every variant is bitwise identical to the reference. Reductions (dot,
// sum_squares) reassociate and agree with the reference to rounding error.
namespace topictax::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct Kernels {
  Isa isa;
  double (*dot)(const double* a, const double* b, size_t n);
  double (*sum_squares)(const double* a, size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, size_t n);
  // x *= a
  void (*scale)(double a, double* x, size_t n);
  // out[k] = (doc[k] + alpha) * (word[k] + beta) / (total[k] + vbeta)
  void (*gibbs_weights)(const int32_t* doc_topic, const int32_t* word_topic,
                        const int32_t* topic_total, double alpha, double beta, double vbeta,
                        double* out, size_t k);
  // out[k] = (doc[k] + alpha) * phi_w[k]
  void (*foldin_weights)(const int32_t* doc_topic, const double* phi_w, double alpha,
                         double* out, size_t k);
};

const Kernels& scalar_kernels();
// Null when the variant is not compiled into this binary.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

// Best supported variant, overridable with TOPICTAX_SIMD=scalar|avx2|neon.
// Resolved once per process.
const Kernels& kernels();

}  // namespace topictax::simd
