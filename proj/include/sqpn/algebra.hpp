#pragma once

// Sign algebra and interval arithmetic over probability differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "sqpn/error.hpp"

namespace sqpn {

/// Absolute tolerance for comparing real-valued results.
inline constexpr double kTolerance = 1e-9;

enum class Sign { Positive, Negative, Zero, Ambiguous };

/// Sign product: transitive combination of influences along a chain.
constexpr Sign sign_mul(Sign a, Sign b) noexcept {
  if (a == Sign::Zero || b == Sign::Zero) return Sign::Zero;
  if (a == Sign::Ambiguous || b == Sign::Ambiguous) return Sign::Ambiguous;
  return a == b ? Sign::Positive : Sign::Negative;
}

/// Sign sum: composition of parallel influences. Acts as the join of the
/// lattice 0 < {+,-} < ?.
constexpr Sign sign_add(Sign a, Sign b) noexcept {
  if (a == Sign::Zero) return b;
  if (b == Sign::Zero) return a;
  return a == b ? a : Sign::Ambiguous;
}

constexpr char sign_char(Sign s) noexcept {
  switch (s) {
    case Sign::Positive: return '+';
    case Sign::Negative: return '-';
    case Sign::Zero: return '0';
    case Sign::Ambiguous: return '?';
  }
  return '?';
}

inline std::string to_string(Sign s) { return std::string(1, sign_char(s)); }

constexpr std::optional<Sign> sign_from_char(char c) noexcept {
  switch (c) {
    case '+': return Sign::Positive;
    case '-': return Sign::Negative;
    case '0': return Sign::Zero;
    case '?': return Sign::Ambiguous;
    default: return std::nullopt;
  }
}

inline std::ostream& operator<<(std::ostream& os, Sign s) { return os << sign_char(s); }

/// Closed subinterval [lo, hi] of [-1, 1]: a range of differences in
/// probability.
class Interval {
 public:
  constexpr Interval() noexcept = default;

  /// Throws InvalidArgument unless -1 <= lo <= hi <= 1.
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo >= -1.0 && lo <= hi && hi <= 1.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "interval [%g, %g] is not a subinterval of [-1, 1]", lo, hi);
      throw InvalidArgument(buf);
    }
  }

  static Interval point(double v) { return {v, v}; }

  constexpr double lo() const noexcept { return lo_; }
  constexpr double hi() const noexcept { return hi_; }
  constexpr double width() const noexcept { return hi_ - lo_; }

  constexpr bool contains(double v, double tol = 0.0) const noexcept {
    return v >= lo_ - tol && v <= hi_ + tol;
  }
  constexpr bool contains(const Interval& o, double tol = 0.0) const noexcept {
    return o.lo_ >= lo_ - tol && o.hi_ <= hi_ + tol;
  }

  friend constexpr bool operator==(const Interval&, const Interval&) noexcept = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline bool approx_equal(const Interval& a, const Interval& b, double tol = kTolerance) noexcept {
  return std::abs(a.lo() - b.lo()) <= tol && std::abs(a.hi() - b.hi()) <= tol;
}

/// Interval product; endpoints of the result are attained by endpoint pairs.
inline Interval interval_mul(const Interval& a, const Interval& b) {
  const std::array<double, 4> p{a.lo() * b.lo(), a.lo() * b.hi(), a.hi() * b.lo(), a.hi() * b.hi()};
  auto [mn, mx] = std::minmax_element(p.begin(), p.end());
  // -0.0 from e.g. 0 * -1 would otherwise leak into rendering.
  return {*mn + 0.0, *mx + 0.0};
}

namespace detail {
inline double clamp_unit(double v) noexcept { return std::clamp(v, -1.0, 1.0); }
}  // namespace detail

/// Interval sum intersected with [-1, 1].
inline Interval interval_add(const Interval& a, const Interval& b) {
  return {detail::clamp_unit(a.lo() + b.lo()), detail::clamp_unit(a.hi() + b.hi())};
}

/// n-ary composition: endpoints summed first, then intersected with [-1, 1]
/// once. Unlike a fold of interval_add this does not depend on operand order.
template <class Range>
Interval interval_sum(const Range& terms) {
  double lo = 0.0, hi = 0.0;
  for (const Interval& t : terms) {
    lo += t.lo();
    hi += t.hi();
  }
  return {detail::clamp_unit(lo), detail::clamp_unit(hi)};
}

/// Zero is tested first, so [0, 0] is zero rather than positive.
constexpr Sign classify(const Interval& a) noexcept {
  if (a.lo() == 0.0 && a.hi() == 0.0) return Sign::Zero;
  if (a.lo() >= 0.0) return Sign::Positive;
  if (a.hi() <= 0.0) return Sign::Negative;
  return Sign::Ambiguous;
}

inline Interval sign_to_unit_interval(Sign s) {
  switch (s) {
    case Sign::Positive: return {0.0, 1.0};
    case Sign::Negative: return {-1.0, 0.0};
    case Sign::Zero: return {0.0, 0.0};
    case Sign::Ambiguous: return {-1.0, 1.0};
  }
  return {-1.0, 1.0};
}

inline bool is_unit_interval(const Interval& a) { return a == sign_to_unit_interval(classify(a)); }

/// Up to six significant digits, trailing zeros trimmed, no negative zero.
inline std::string format_number(double v) {
  if (std::abs(v) < 5e-13) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

inline std::string to_string(const Interval& a) {
  return "[" + format_number(a.lo()) + ", " + format_number(a.hi()) + "]";
}

inline std::ostream& operator<<(std::ostream& os, const Interval& a) { return os << to_string(a); }

}  // namespace sqpn
