// Copyright 2026 The agv-qubo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <boost/rational.hpp>

namespace agv {

/// Exact rational used for weights, objective coefficients and exact QUBO
/// arithmetic.
using Rational = boost::rational<std::int64_t>;

/// Integer time in ticks.
using Tick = std::int64_t;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }
inline double to_double(double d) { return d; }

/// Converts to the scalar type used by a templated model.
template <class Scalar>
Scalar scalar_cast(const Rational& r) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    return r;
  } else {
    return static_cast<Scalar>(to_double(r));
  }
}

template <class Scalar>
Scalar scalar_cast(std::int64_t v) {
  return Scalar(v);
}

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions). Exact for values written from a Rational with a
/// small denominator, e.g. 1/3 -> 0.333.. -> 1/3.
inline Rational rational_from_double(double x, std::int64_t max_den = 1000000) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite number");
  const bool neg = x < 0;
  double v = std::fabs(x);
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(v);
    if (a_d > 9.0e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t q2 = q0 + a * q1;
    if (q2 > max_den) break;
    const std::int64_t p2 = p0 + a * p1;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = v - a_d;
    if (frac < 1e-12) break;
    v = 1.0 / frac;
  }
  if (q1 == 0) throw std::invalid_argument("number out of range");
  return Rational(neg ? -p1 : p1, q1);
}

/// Parses "p/q" or an integer string.
inline Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed rational '" + text + "'");
  }
}

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace agv
