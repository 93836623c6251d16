#include "pdvar/money.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "pdvar/error.hpp"

namespace pdvar {

Money Money::from_double(double amount) {
  if (!std::isfinite(amount)) throw ValidationError("money amount must be finite");
  return Money(static_cast<std::int64_t>(std::llround(amount * 100.0)));
}

Money Money::parse(std::string_view text) {
  if (text.empty()) throw ValidationError("empty money amount");
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::int64_t units = 0;
  std::size_t int_digits = 0;
  for (; pos < text.size() && text[pos] != '.'; ++pos, ++int_digits) {
    const char c = text[pos];
    if (c < '0' || c > '9') throw ValidationError(fmt::format("invalid money amount '{}'", text));
    if (units > (INT64_MAX / 100 - 9) / 10) throw ValidationError("money amount out of range");
    units = units * 10 + (c - '0');
  }
  std::int64_t frac = 0;
  std::size_t frac_digits = 0;
  if (pos < text.size()) {
    ++pos;  // '.'
    for (; pos < text.size(); ++pos, ++frac_digits) {
      const char c = text[pos];
      if (c < '0' || c > '9') throw ValidationError(fmt::format("invalid money amount '{}'", text));
      if (frac_digits < 2) {
        frac = frac * 10 + (c - '0');
      } else if (c != '0') {
        throw ValidationError(fmt::format("money amount '{}' has sub-cent precision", text));
      }
    }
    if (frac_digits == 0 && int_digits == 0) throw ValidationError("invalid money amount");
  }
  if (int_digits == 0 && frac_digits == 0) throw ValidationError(fmt::format("invalid money amount '{}'", text));
  if (frac_digits == 1) frac *= 10;
  const std::int64_t cents = units * 100 + frac;
  return Money(negative ? -cents : cents);
}

std::string Money::to_string() const {
  const std::int64_t mag = cents_ < 0 ? -cents_ : cents_;
  return fmt::format("{}{}.{:02d}", cents_ < 0 ? "-" : "", mag / 100, mag % 100);
}

Money mean(std::span<const Money> amounts) {
  if (amounts.empty()) throw EmptySampleError("mean of an empty sample");
  std::int64_t total = 0;
  for (const Money m : amounts) {
    if (__builtin_add_overflow(total, m.cents(), &total)) throw ValidationError("money sum overflows");
  }
  const auto n = static_cast<std::int64_t>(amounts.size());
  std::int64_t q = total / n;
  const std::int64_t r = total % n;
  // half away from zero
  if (2 * (r < 0 ? -r : r) >= n) q += total < 0 ? -1 : 1;
  return Money::from_cents(q);
}

}  // namespace pdvar
