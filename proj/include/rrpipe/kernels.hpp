#pragma once

#include <cstdint>
#include <span>
#include <string_view>

// Posting-list scoring kernels behind the BM25 index. Every variant performs
// the same IEEE operations in the same order, so results are bit-identical
// to the scalar reference.
namespace rrpipe::kernels {

enum class Isa { scalar, avx2, neon };

/// out[i] = k1 * ((1 - b) + b * (lengths[i] / avg_length))
using LengthNormFn = void (*)(std::span<const std::uint32_t> lengths, double k1, double b,
                              double avg_length, std::span<double> out);

/// For each posting i with d = docs[i], f = freqs[i]:
///   acc[d] += idf * ((f * k1_plus_1) / (f + norms[d]))
/// Doc ordinals within one posting list must be distinct.
using AccumulateFn = void (*)(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                              std::span<const std::uint32_t> freqs, std::span<const double> norms,
                              std::span<double> acc);

struct KernelTable {
  Isa isa;
  LengthNormFn length_norms;
  AccumulateFn accumulate;
};

/// Variant compiled in and supported by this CPU, or nullptr.
const KernelTable* table_for(Isa isa);

/// Best available variant. `RRPIPE_ISA=scalar|avx2|neon` in the environment
/// forces a choice when that variant is available.
const KernelTable& active();

std::string_view isa_name(Isa isa);

namespace scalar {
void length_norms(std::span<const std::uint32_t> lengths, double k1, double b, double avg_length,
                  std::span<double> out);
void accumulate(double idf, double k1_plus_1, std::span<const std::uint32_t> docs,
                std::span<const std::uint32_t> freqs, std::span<const double> norms,
                std::span<double> acc);
}  // namespace scalar

}  // namespace rrpipe::kernels
