#pragma once

#include "rrpipe/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define RRPIPE_HAVE_AVX2_KERNELS 1
#else
#define RRPIPE_HAVE_AVX2_KERNELS 0
#endif

#if defined(__aarch64__)
#define RRPIPE_HAVE_NEON_KERNELS 1
#else
#define RRPIPE_HAVE_NEON_KERNELS 0
#endif

namespace rrpipe::kernels {

#if RRPIPE_HAVE_AVX2_KERNELS
namespace avx2 {
void length_norms(std::span<const std::uint32_t> lengths, double k1, double b, double avg_length,
                  std::span<double> out);
void accumulate(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                std::span<const std::uint32_t> freqs, std::span<const double> norms,
                std::span<double> acc);
}  // namespace avx2
#endif

#if RRPIPE_HAVE_NEON_KERNELS
namespace neon {
void length_norms(std::span<const std::uint32_t> lengths, double k1, double b, double avg_length,
                  std::span<double> out);
void accumulate(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                std::span<const std::uint32_t> freqs, std::span<const double> norms,
                std::span<double> acc);
}  // namespace neon
#endif

}  // namespace rrpipe::kernels
