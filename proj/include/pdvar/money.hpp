#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace pdvar {

// Exact decimal amount in euro cents. Aggregations over fines stay in integer
// arithmetic so that reported means are reproducible to the cent.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
  static Money from_units(std::int64_t units) { return Money(units * 100); }
  // Rounds half away from zero to the nearest cent.
  static Money from_double(double amount);
  // Accepts "123", "123.4", "123.45" and an optional leading '-'. Anything with
  // more than two fractional digits (other than trailing zeros) is rejected.
  static Money parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }
  double to_double() const { return static_cast<double>(cents_) / 100.0; }
  // Canonical form with exactly two fractional digits, e.g. "906000.00".
  std::string to_string() const;

  constexpr Money operator+(Money o) const { return Money(cents_ + o.cents_); }
  constexpr Money operator-(Money o) const { return Money(cents_ - o.cents_); }
  constexpr Money& operator+=(Money o) {
    cents_ += o.cents_;
    return *this;
  }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

// Arithmetic mean rounded half away from zero to the cent.
// Throws EmptySampleError on an empty span.
Money mean(std::span<const Money> amounts);

}  // namespace pdvar
