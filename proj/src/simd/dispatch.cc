#include <cstdlib>
#include <string>

#include "topictax/log.h"
#include "topictax/simd.h"

namespace topictax::simd {

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
      // Advanced SIMD is mandatory on AArch64.
      return neon_kernels() != nullptr;
  }
  return false;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

namespace {

const Kernels& table_for(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      return *avx2_kernels();
    case Isa::kNeon:
      return *neon_kernels();
    case Isa::kScalar:
      break;
  }
  return scalar_kernels();
}

const Kernels& resolve() {
  if (const char* env = std::getenv("TOPICTAX_SIMD"); env != nullptr && *env != '\0') {
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (isa_name(isa) != env) continue;
      if (isa_supported(isa)) return table_for(isa);
      log::warn(std::string("TOPICTAX_SIMD=") + env + " not supported here; using default");
    }
  }
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (isa_supported(isa)) return table_for(isa);
  }
  return scalar_kernels();
}

}  // namespace

const Kernels& kernels() {
  static const Kernels& chosen = resolve();
  return chosen;
}

}  // namespace topictax::simd
