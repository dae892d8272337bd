#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace fairdiv {

// All share values, LP data and dual multipliers are exact rationals.
// Serialized form is "p" or "p/q" with q > 0.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline std::optional<Rational> try_parse_rational(const std::string& text) {
  auto is_integer = [](const std::string& s, bool sign_ok) {
    if (s.empty()) return false;
    std::size_t i = (sign_ok && s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  const std::size_t slash = text.find('/');
  const std::string num = slash == std::string::npos ? text : text.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  if (!is_integer(num, true) || !is_integer(den, false)) return std::nullopt;
  mpz_class n(num), d(den);
  if (d == 0) return std::nullopt;
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

}  // namespace fairdiv
