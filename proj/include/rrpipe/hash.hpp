#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rrpipe {

// 64-bit FNV-1a. Stable across platforms; used for prompt, template and
// config identities, never for anything security related.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex64(std::uint64_t value) {
  constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
  return out;
}

inline std::string stable_hash_hex(std::string_view bytes) { return to_hex64(fnv1a64(bytes)); }

}  // namespace rrpipe
