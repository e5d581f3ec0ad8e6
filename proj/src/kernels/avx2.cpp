// Compiled with -mavx2 (and never -mfma); only reached after a CPUID check.
#include "kernels_internal.hpp"

#if RRPIPE_HAVE_AVX2_KERNELS

#include <immintrin.h>

namespace rrpipe::kernels::avx2 {

namespace {
constexpr std::size_t kLanes = 4;

// Frequencies and lengths are < 2^31 in any index we build, so the signed
// conversion is exact.
inline __m256d load_u32_as_pd(const std::uint32_t* p) {
  return _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}
}  // namespace

void length_norms(std::span<const std::uint32_t> lengths, double k1, double b, double avg_length,
                  std::span<double> out) {
  const double one_minus_b = 1.0 - b;
  const __m256d vk1 = _mm256_set1_pd(k1);
  const __m256d vb = _mm256_set1_pd(b);
  const __m256d vomb = _mm256_set1_pd(one_minus_b);
  const __m256d vavg = _mm256_set1_pd(avg_length);
  const std::size_t n = lengths.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d len = load_u32_as_pd(lengths.data() + i);
    __m256d ratio = _mm256_div_pd(len, vavg);
    __m256d norm = _mm256_mul_pd(vk1, _mm256_add_pd(vomb, _mm256_mul_pd(vb, ratio)));
    _mm256_storeu_pd(out.data() + i, norm);
  }
  scalar::length_norms(lengths.subspan(i), k1, b, avg_length, out.subspan(i));
}

void accumulate(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                std::span<const std::uint32_t> freqs, std::span<const double> norms,
                std::span<double> acc) {
  const __m256d vidf = _mm256_set1_pd(idf);
  const __m256d vk1p1 = _mm256_set1_pd(k1_plus_1);
  const std::size_t n = docs.size();
  alignas(32) double weights[kLanes];
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(docs.data() + i));
    __m256d norm = _mm256_i32gather_pd(norms.data(), idx, 8);
    __m256d f = load_u32_as_pd(freqs.data() + i);
    __m256d w = _mm256_mul_pd(vidf, _mm256_div_pd(_mm256_mul_pd(f, vk1p1), _mm256_add_pd(f, norm)));
    _mm256_store_pd(weights, w);
    // No scatter in AVX2; doc ordinals are distinct within a list.
    for (std::size_t lane = 0; lane < kLanes; ++lane) acc[docs[i + lane]] += weights[lane];
  }
  scalar::accumulate(idf, k1_plus_1, docs.subspan(i), freqs.subspan(i), norms, acc);
}

}  // namespace rrpipe::kernels::avx2

#endif
