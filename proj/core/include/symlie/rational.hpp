#pragma once
// Exact rational coefficient support plus the exact/floating mode switch.

#include <gmpxx.h>
#include <cmath>
#include <cstdint>
#include <string>

namespace symlie {

using Rational = mpq_class;

enum class Mode { exact, floating };

inline Rational rat(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double x) { return x; }

// Coefficient traits shared by the exact and floating term containers.
template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<Rational> {
  static constexpr Mode mode = Mode::exact;
  static bool is_zero(const Rational& c) { return sgn(c) == 0; }
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static Rational from_long(long v) { return Rational(v); }
  static double abs_double(const Rational& c) { return std::fabs(c.get_d()); }
};

template <>
struct CoeffTraits<double> {
  static constexpr Mode mode = Mode::floating;
  // Term-drop threshold for floating coefficients.
  static constexpr double drop_eps = 1e-12;
  static bool is_zero(double c) { return std::fabs(c) <= drop_eps; }
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double from_long(long v) { return static_cast<double>(v); }
  static double abs_double(double c) { return std::fabs(c); }
};

// True when num/den fit in int64 (for compact JSON); otherwise callers emit
// the decimal string forms.
bool fits_int64(const Rational& q, std::int64_t& num, std::int64_t& den);

std::string rational_to_string(const Rational& q);
Rational rational_from_string(const std::string& s);

}  // namespace symlie
