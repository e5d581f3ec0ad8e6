#include "rrpipe/money.hpp"

#include <cstdio>

#include "rrpipe/error.hpp"

namespace rrpipe {

namespace {
constexpr std::int64_t kPicoPerMicro = 1'000'000;
}

std::int64_t Money::microdollars() const {
  std::int64_t whole = units_ / kPicoPerMicro;
  std::int64_t rem = units_ % kPicoPerMicro;
  if (rem < 0) {
    rem += kPicoPerMicro;
    --whole;
  }
  return rem * 2 >= kPicoPerMicro ? whole + 1 : whole;
}

std::string Money::to_string() const {
  std::int64_t micro = microdollars();
  bool negative = micro < 0;
  std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(micro + 1)) + 1 : static_cast<std::uint64_t>(micro);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", negative ? "-" : "",
                static_cast<unsigned long long>(mag / 1'000'000),
                static_cast<unsigned long long>(mag % 1'000'000));
  return buf;
}

Money& Money::operator+=(Money other) {
  if (__builtin_add_overflow(units_, other.units_, &units_)) throw Error("cost overflow");
  return *this;
}

TokenPrice TokenPrice::parse(std::string_view text) {
  auto bad = [&] { return ValidationError("invalid price '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_dot) throw bad();
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw bad();
    any_digit = true;
    int digit = c - '0';
    if (seen_dot) {
      if (++frac_digits > 6) throw ValidationError("price '" + std::string(text) + "' has more than 6 decimals");
      frac = frac * 10 + digit;
    } else {
      if (__builtin_mul_overflow(whole, 10, &whole) || __builtin_add_overflow(whole, digit, &whole)) throw bad();
    }
  }
  if (!any_digit) throw bad();
  for (int i = frac_digits; i < 6; ++i) frac *= 10;
  std::int64_t micro = 0;
  if (__builtin_mul_overflow(whole, kPicoPerMicro, &micro) || __builtin_add_overflow(micro, frac, &micro))
    throw bad();
  return TokenPrice(micro);
}

Money TokenPrice::cost(std::int64_t tokens) const {
  std::int64_t units = 0;
  if (tokens < 0) throw Error("negative token count");
  if (__builtin_mul_overflow(tokens, micro_, &units)) throw Error("cost overflow");
  return Money::from_picodollars(units);
}

std::string TokenPrice::to_string() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld.%06lld", static_cast<long long>(micro_ / kPicoPerMicro),
                static_cast<long long>(micro_ % kPicoPerMicro));
  return buf;
}

}  // namespace rrpipe
