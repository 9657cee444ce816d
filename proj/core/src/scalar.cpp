#include "pdrbsde/scalar.hpp"

#include <cctype>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace pdrbsde {

using boost::multiprecision::cpp_int;

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);
  // 53-bit mantissa as an integer
  auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  cpp_int num = m;
  cpp_int den = 1;
  if (exp >= 0) {
    num <<= exp;
  } else {
    den <<= -exp;
  }
  return Rational(num, den);
}

namespace {

Rational parse_decimal(const std::string& s) {
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    neg = s[i] == '-';
    ++i;
  }
  cpp_int digits = 0;
  int frac = 0;
  bool seen_digit = false;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seen_dot) ++frac;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("not a number: '" + s + "'");
  long exp10 = -frac;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::size_t used = 0;
    long e = std::stol(s.substr(i), &used);
    i += used;
    exp10 += e;
  }
  if (i != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  cpp_int scale = 1;
  for (long j = 0; j < (exp10 < 0 ? -exp10 : exp10); ++j) scale *= 10;
  Rational r = exp10 >= 0 ? Rational(digits * scale) : Rational(digits, scale);
  return neg ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  auto slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s);
  Rational num = parse_decimal(s.substr(0, slash));
  Rational den = parse_decimal(s.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator: '" + text + "'");
  return num / den;
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

std::string to_string(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::optional<Rational> exact_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  cpp_int n = numerator(r);
  cpp_int d = denominator(r);
  cpp_int sn = boost::multiprecision::sqrt(n);
  cpp_int sd = boost::multiprecision::sqrt(d);
  if (sn * sn != n || sd * sd != d) return std::nullopt;
  return Rational(sn, sd);
}

}  // namespace pdrbsde
