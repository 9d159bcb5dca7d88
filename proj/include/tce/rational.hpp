#pragma once

#include <gmpxx.h>

#include <string>

#include "tce/error.hpp"

namespace tce {

// Exact rational scalar. GMP keeps the integers arbitrary precision; mpq_class
// canonicalizes on construction from integers but not from another mpq, so the
// factories below normalize explicitly.
using Rational = mpq_class;

inline Rational make_rat(long num, long den = 1) {
  if (den == 0)
    throw EngineError(ErrorKind::UndefinedValue, "division by zero");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational rat_from_string(const std::string& digits) {
  Rational r(digits);
  r.canonicalize();
  return r;
}

inline bool rat_is_zero(const Rational& r) { return sgn(r) == 0; }
inline bool rat_is_one(const Rational& r) { return r == 1; }
inline bool rat_is_integer(const Rational& r) { return r.get_den() == 1; }

// Integer power with exact result; negative exponents invert.
inline Rational rat_pow(const Rational& base, long exp) {
  if (exp == 0) return Rational(1);
  if (rat_is_zero(base) && exp < 0)
    throw EngineError(ErrorKind::UndefinedValue, "zero raised to a negative power");
  unsigned long mag = exp < 0 ? static_cast<unsigned long>(-exp)
                              : static_cast<unsigned long>(exp);
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), mag);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), mag);
  r.canonicalize();
  if (exp < 0) r = 1 / r;
  return r;
}

// "p/q" or just "p" when q == 1.
inline std::string rat_to_string(const Rational& r) { return r.get_str(); }

}  // namespace tce
