#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace rrpipe {

/// Exact dollar amount in units of 1e-12 USD. One token priced in
/// micro-dollars per million tokens is exactly one such unit, so costs
/// accumulate without rounding.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_picodollars(std::int64_t units) { return Money(units); }

  constexpr std::int64_t picodollars() const { return units_; }
  double dollars() const { return static_cast<double>(units_) / 1e12; }

  /// Rounded half-up to whole micro-dollars.
  std::int64_t microdollars() const;

  /// Decimal dollars with six places, e.g. "0.100000".
  std::string to_string() const;

  Money& operator+=(Money other);
  friend Money operator+(Money a, Money b) { return a += b; }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t units) : units_(units) {}
  std::int64_t units_ = 0;
};

/// Price in micro-dollars per million tokens, parsed exactly from a decimal
/// dollar string such as "0.10" (at most six fractional digits).
class TokenPrice {
 public:
  constexpr TokenPrice() = default;
  static TokenPrice parse(std::string_view dollars_per_million);
  static constexpr TokenPrice from_micro(std::int64_t micro) { return TokenPrice(micro); }

  constexpr std::int64_t micro_per_million() const { return micro_; }
  Money cost(std::int64_t tokens) const;
  std::string to_string() const;

  constexpr auto operator<=>(const TokenPrice&) const = default;

 private:
  constexpr explicit TokenPrice(std::int64_t micro) : micro_(micro) {}
  std::int64_t micro_ = 0;
};

}  // namespace rrpipe
