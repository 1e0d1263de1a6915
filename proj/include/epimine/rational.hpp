#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace epimine {

using BigInt = boost::multiprecision::cpp_int;

// Exact fraction. All null-model probabilities are carried as Rationals;
// nothing on the model side is ever rounded. Backed by cpp_rational, which
// keeps the value fully reduced with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rational& r) { return numerator(r); }
inline BigInt rat_den(const Rational& r) { return denominator(r); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.convert_to<double>(); }

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den <= 0) throw std::invalid_argument("rational: denominator must be positive");
  return Rational(num, den);
}

// Parses "a/b" or a plain integer.
inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(BigInt(text));
  BigInt num(text.substr(0, slash));
  BigInt den(text.substr(slash + 1));
  return make_rational(num, den);
}

inline std::string to_string(const Rational& r) {
  if (rat_den(r) == 1) return rat_num(r).str();
  return rat_num(r).str() + "/" + rat_den(r).str();
}

inline BigInt big_pow(const BigInt& base, unsigned exp) {
  BigInt out(1), b(base);
  for (unsigned e = exp; e != 0; e >>= 1) {
    if (e & 1) out *= b;
    if (e > 1) b *= b;
  }
  return out;
}

}  // namespace epimine
