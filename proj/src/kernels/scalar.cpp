#include "rrpipe/kernels.hpp"

namespace rrpipe::kernels::scalar {

void length_norms(std::span<const std::uint32_t> lengths, double k1, double b, double avg_length,
                  std::span<double> out) {
  const double one_minus_b = 1.0 - b;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    out[i] = k1 * (one_minus_b + b * (static_cast<double>(lengths[i]) / avg_length));
  }
}

void accumulate(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                std::span<const std::uint32_t> freqs, std::span<const double> norms,
                std::span<double> acc) {
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const double f = static_cast<double>(freqs[i]);
    acc[docs[i]] += idf * ((f * k1_plus_1) / (f + norms[docs[i]]));
  }
}

}  // namespace rrpipe::kernels::scalar
