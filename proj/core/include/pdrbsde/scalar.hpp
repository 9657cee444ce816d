#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>

namespace pdrbsde {

using Rational = boost::multiprecision::cpp_rational;

enum class Arithmetic { Rational, Float };

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

// Exact binary value of a double.
Rational rational_from_double(double x);

template <class S>
S from_rational(const Rational& r) {
  if constexpr (is_exact_v<S>) {
    return r;
  } else {
    return to_double(r);
  }
}

template <class S>
S from_double(double x) {
  if constexpr (is_exact_v<S>) {
    return rational_from_double(x);
  } else {
    return x;
  }
}

// Accepts "3", "-3/4", "0.125", "1e-3".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);
std::string to_string(double x);

std::optional<Rational> exact_sqrt(const Rational& r);

template <class S>
S abs_of(const S& x) {
  return x < 0 ? S(-x) : x;
}

template <class S>
S pos_part(const S& x) {
  return x > 0 ? x : S(0);
}

template <class S>
S neg_part(const S& x) {
  return x < 0 ? S(-x) : S(0);
}

template <class S>
const S& max_of(const S& a, const S& b) {
  return a < b ? b : a;
}

template <class S>
const S& min_of(const S& a, const S& b) {
  return b < a ? b : a;
}

template <class S>
double abs_diff(const S& a, const S& b) {
  return to_double(abs_of(S(a - b)));
}

// Slack for structural checks (measurability, martingale tests) inside solvers.
template <class S>
constexpr double structural_tol() {
  return is_exact_v<S> ? 0.0 : 1e-9;
}

// Exact equality when tol == 0, absolute tolerance otherwise.
template <class S>
bool near(const S& a, const S& b, double tol) {
  if (tol == 0.0) return a == b;
  return abs_diff(a, b) <= tol;
}

}  // namespace pdrbsde
