#include "kernels_internal.hpp"

#if RRPIPE_HAVE_NEON_KERNELS

#include <arm_neon.h>

namespace rrpipe::kernels::neon {

namespace {
constexpr std::size_t kLanes = 2;

inline float64x2_t load_u32_as_f64(const std::uint32_t* p) {
  return vcvtq_f64_u64(vmovl_u32(vld1_u32(p)));
}
}  // namespace

void length_norms(std::span<const std::uint32_t> lengths, double k1, double b, double avg_length,
                  std::span<double> out) {
  const double one_minus_b = 1.0 - b;
  const float64x2_t vk1 = vdupq_n_f64(k1);
  const float64x2_t vb = vdupq_n_f64(b);
  const float64x2_t vomb = vdupq_n_f64(one_minus_b);
  const float64x2_t vavg = vdupq_n_f64(avg_length);
  const std::size_t n = lengths.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    float64x2_t ratio = vdivq_f64(load_u32_as_f64(lengths.data() + i), vavg);
    float64x2_t norm = vmulq_f64(vk1, vaddq_f64(vomb, vmulq_f64(vb, ratio)));
    vst1q_f64(out.data() + i, norm);
  }
  scalar::length_norms(lengths.subspan(i), k1, b, avg_length, out.subspan(i));
}

void accumulate(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                std::span<const std::uint32_t> freqs, std::span<const double> norms,
                std::span<double> acc) {
  const float64x2_t vidf = vdupq_n_f64(idf);
  const float64x2_t vk1p1 = vdupq_n_f64(k1_plus_1);
  const std::size_t n = docs.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const double gathered[kLanes] = {norms[docs[i]], norms[docs[i + 1]]};
    float64x2_t norm = vld1q_f64(gathered);
    float64x2_t f = load_u32_as_f64(freqs.data() + i);
    float64x2_t w = vmulq_f64(vidf, vdivq_f64(vmulq_f64(f, vk1p1), vaddq_f64(f, norm)));
    acc[docs[i]] += vgetq_lane_f64(w, 0);
    acc[docs[i + 1]] += vgetq_lane_f64(w, 1);
  }
  scalar::accumulate(idf, k1_plus_1, docs.subspan(i), freqs.subspan(i), norms, acc);
}

}  // namespace rrpipe::kernels::neon

#endif
