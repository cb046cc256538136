#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace spinbath::logmath {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// ln(1 - e^{-a}) for a > 0, accurate for both tiny and large a.
inline double log1mexp(double a) {
  // For a < ln 2 the expm1 form avoids cancellation in 1-e^{-a};
  // above it log1p(-e^{-a}) is exact enough and cannot underflow first.
  if (a <= 0.6931471805599453) return std::log(-std::expm1(-a));
  return std::log1p(-std::exp(-a));
}

// Overflow-safe ln(sum exp(v)); empty input or all -inf gives -inf.
inline double log_sum_exp(std::span<const double> v) {
  double m = neg_inf;
  for (double x : v)
    if (x > m) m = x;
  if (m == neg_inf) return neg_inf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

// Natural log of a positive big integer. Values beyond double range are
// handled by splitting off the top bits: ln v = ln(v >> k) + k ln 2.
//
// GCC's fortify analysis cannot see that the shifted temporary always has
// exactly 63 bits (two limbs, inside the small-value buffer) and reports a
// potentially unbounded memcpy out of boost's copy constructor.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wstringop-overflow"
#pragma GCC diagnostic ignored "-Wstringop-overread"
inline double log_big(const BigInt& v) {
  if (v <= 0) throw std::domain_error("log_big: argument must be positive");
  unsigned bits = boost::multiprecision::msb(v);  // highest set bit index
  if (bits < 900) return std::log(v.convert_to<double>());
  unsigned shift = bits - 62;
  BigInt top = v >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * 0.6931471805599453094;
}
#pragma GCC diagnostic pop

// csch^2(y) = 1/sinh^2(y), with the small-y series handled by the caller.
inline double csch2(double y) {
  double s = std::sinh(y);
  return 1.0 / (s * s);
}

}  // namespace spinbath::logmath
