#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace rrpipe::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::length_norms, &scalar::accumulate};
#if RRPIPE_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{Isa::avx2, &avx2::length_norms, &avx2::accumulate};
#endif
#if RRPIPE_HAVE_NEON_KERNELS
constexpr KernelTable kNeon{Isa::neon, &neon::length_norms, &neon::accumulate};
#endif

const KernelTable& select() {
  if (const char* forced = std::getenv("RRPIPE_ISA")) {
    std::string name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == isa_name(isa)) {
        if (const auto* table = table_for(isa)) return *table;
      }
    }
  }
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (const auto* table = table_for(isa)) return *table;
  }
  return kScalar;
}

}  // namespace

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalar;
    case Isa::avx2:
#if RRPIPE_HAVE_AVX2_KERNELS
      if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
      return nullptr;
    case Isa::neon:
#if RRPIPE_HAVE_NEON_KERNELS
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

}  // namespace rrpipe::kernels
