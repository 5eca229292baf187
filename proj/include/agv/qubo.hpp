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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agv/ilp.hpp"
#include "agv/rational.hpp"

namespace agv {

/// Weighted bit vector for a bounded integer: value = offset + sum(weight * bit).
struct IntegerEncoding {
  std::string name;
  std::int64_t offset = 0;
  std::int64_t range = 0;  // hi - lo; weights sum to exactly this
  std::vector<std::pair<std::size_t, std::int64_t>> bits;
};

/// Powers of two with the top weight truncated so the sum equals `range`.
inline std::vector<std::int64_t> range_weights(std::int64_t range) {
  if (range < 0) throw std::invalid_argument("negative encoding range");
  std::vector<std::int64_t> w;
  std::int64_t sum = 0;
  for (std::int64_t p = 1; sum < range; p *= 2) {
    w.push_back(std::min(p, range - sum));
    sum += w.back();
  }
  return w;
}

/// Maps every LP variable and every inequality slack to its bits.
struct Encoding {
  std::vector<IntegerEncoding> vars;    // parallel to LinearProgram::vars
  std::vector<IntegerEncoding> slacks;  // parallel to LinearProgram::inequalities
  std::size_t n_bits = 0;
  std::vector<std::string> bit_names;
};

template <class Scalar>
struct BasicQubo {
  std::size_t n_bits = 0;
  std::vector<Scalar> linear;
  std::map<std::pair<std::size_t, std::size_t>, Scalar> quadratic;  // keys have first < second
  Scalar offset{0};

  explicit BasicQubo(std::size_t n = 0) : n_bits(n), linear(n, Scalar(0)) {}

  void add_linear(std::size_t i, const Scalar& c) { linear.at(i) += c; }
  /// x_i * x_i collapses to x_i.
  void add_quadratic(std::size_t i, std::size_t j, const Scalar& c) {
    if (i == j) return add_linear(i, c);
    if (i > j) std::swap(i, j);
    if (j >= n_bits) throw std::out_of_range("qubo bit out of range");
    quadratic[{i, j}] += c;
  }
  void drop_zeros() { std::erase_if(quadratic, [](const auto& kv) { return kv.second == Scalar(0); }); }

  template <class Bit>
  Scalar energy(std::span<const Bit> x) const {
    if (x.size() != n_bits) throw std::invalid_argument("assignment size mismatch");
    Scalar e = offset;
    for (std::size_t i = 0; i < n_bits; ++i)
      if (x[i]) e += linear[i];
    for (const auto& [ij, c] : quadratic)
      if (x[ij.first] && x[ij.second]) e += c;
    return e;
  }
  Scalar energy(const std::vector<std::uint8_t>& x) const { return energy(std::span<const std::uint8_t>(x)); }
};

/// Minimises offset + sum h_i s_i + sum J_ij s_i s_j over s in {-1, +1}.
template <class Scalar>
struct BasicIsing {
  std::size_t n_spins = 0;
  std::vector<Scalar> h;
  std::map<std::pair<std::size_t, std::size_t>, Scalar> coupling;  // keys have first < second
  Scalar offset{0};

  explicit BasicIsing(std::size_t n = 0) : n_spins(n), h(n, Scalar(0)) {}

  void add_coupling(std::size_t i, std::size_t j, const Scalar& c) {
    if (i == j) {  // s_i^2 = 1
      offset += c;
      return;
    }
    if (i > j) std::swap(i, j);
    if (j >= n_spins) throw std::out_of_range("ising spin out of range");
    coupling[{i, j}] += c;
  }

  template <class Spin>
  Scalar energy(std::span<const Spin> s) const {
    if (s.size() != n_spins) throw std::invalid_argument("assignment size mismatch");
    Scalar e = offset;
    for (std::size_t i = 0; i < n_spins; ++i) e += s[i] > 0 ? h[i] : -h[i];
    for (const auto& [ij, c] : coupling) e += (s[ij.first] > 0) == (s[ij.second] > 0) ? c : -c;
    return e;
  }
  Scalar energy(const std::vector<std::int8_t>& s) const { return energy(std::span<const std::int8_t>(s)); }
};

using Qubo = BasicQubo<double>;
using Ising = BasicIsing<double>;
using ExactQubo = BasicQubo<Rational>;
using ExactIsing = BasicIsing<Rational>;

template <class To, class From>
BasicQubo<To> qubo_cast(const BasicQubo<From>& q) {
  BasicQubo<To> out(q.n_bits);
  auto conv = [](const From& v) {
    if constexpr (std::is_same_v<From, Rational>) return scalar_cast<To>(v);
    else return static_cast<To>(v);
  };
  for (std::size_t i = 0; i < q.n_bits; ++i) out.linear[i] = conv(q.linear[i]);
  for (const auto& [ij, c] : q.quadratic) out.quadratic.emplace(ij, conv(c));
  out.offset = conv(q.offset);
  return out;
}

/// x = (s + 1) / 2; exact for any field in which 1/2 and 1/4 are exact.
template <class Scalar>
BasicIsing<Scalar> qubo_to_ising(const BasicQubo<Scalar>& q) {
  BasicIsing<Scalar> m(q.n_bits);
  const Scalar half = Scalar(1) / Scalar(2);
  const Scalar quarter = Scalar(1) / Scalar(4);
  m.offset = q.offset;
  for (std::size_t i = 0; i < q.n_bits; ++i) {
    m.h[i] += q.linear[i] * half;
    m.offset += q.linear[i] * half;
  }
  for (const auto& [ij, b] : q.quadratic) {
    m.coupling[ij] += b * quarter;
    m.h[ij.first] += b * quarter;
    m.h[ij.second] += b * quarter;
    m.offset += b * quarter;
  }
  std::erase_if(m.coupling, [](const auto& kv) { return kv.second == Scalar(0); });
  return m;
}

/// Inverse map s = 2x - 1, used by samplers that work on QUBOs.
template <class Scalar>
BasicQubo<Scalar> ising_to_qubo(const BasicIsing<Scalar>& m) {
  BasicQubo<Scalar> q(m.n_spins);
  q.offset = m.offset;
  for (std::size_t i = 0; i < m.n_spins; ++i) {
    q.linear[i] += Scalar(2) * m.h[i];
    q.offset -= m.h[i];
  }
  for (const auto& [ij, c] : m.coupling) {
    q.quadratic[ij] += Scalar(4) * c;
    q.linear[ij.first] -= Scalar(2) * c;
    q.linear[ij.second] -= Scalar(2) * c;
    q.offset += c;
  }
  q.drop_zeros();
  return q;
}

// ---------------------------------------------------------------------------
// LP -> QUBO

/// Sum of objective coefficients times variable upper bounds, plus one. The
/// objective is nonnegative over the boxes, so one unit of squared violation
/// outweighs any objective gain.
inline Rational default_penalty(const LinearProgram& lp) {
  Rational p(1);
  for (const auto& [v, c] : lp.objective) p += c * Rational(lp.vars[v].hi);
  return p;
}

/// Largest value of sum(coeff * var) over the variable boxes.
inline std::int64_t max_lhs(const LinearProgram& lp, const LinearConstraint& c) {
  std::int64_t m = 0;
  for (const auto& t : c.terms) m += t.coeff * (t.coeff > 0 ? lp.vars[t.var].hi : lp.vars[t.var].lo);
  return m;
}

inline Encoding make_encoding(const LinearProgram& lp) {
  Encoding enc;
  auto encode = [&](std::string name, std::int64_t lo, std::int64_t range) {
    IntegerEncoding e{std::move(name), lo, range, {}};
    const auto w = range_weights(range);
    for (std::size_t k = 0; k < w.size(); ++k) {
      e.bits.emplace_back(enc.n_bits++, w[k]);
      enc.bit_names.push_back(e.name + "#" + std::to_string(k));
    }
    return e;
  };
  for (const auto& v : lp.vars) enc.vars.push_back(encode(v.name, v.lo, v.hi - v.lo));
  for (std::size_t i = 0; i < lp.inequalities.size(); ++i) {
    const auto& c = lp.inequalities[i];
    const std::int64_t bound = max_lhs(lp, c) - c.rhs;
    if (bound < 0)
      throw std::domain_error("constraint '" + c.label + "' cannot hold within the time windows");
    enc.slacks.push_back(encode("slack_" + std::to_string(i), 0, bound));
  }
  return enc;
}

namespace detail {

/// Affine form over bits with integer coefficients: sum(coeff * bit) + constant.
struct BitForm {
  std::map<std::size_t, std::int64_t> coeff;
  std::int64_t constant = 0;

  void add(const IntegerEncoding& e, std::int64_t scale) {
    constant += scale * e.offset;
    for (const auto& [bit, w] : e.bits) coeff[bit] += scale * w;
  }
};

/// q += p * form^2.
inline void add_squared(ExactQubo& q, const BitForm& f, const Rational& p) {
  std::vector<std::pair<std::size_t, std::int64_t>> terms;
  for (const auto& [b, c] : f.coeff)
    if (c != 0) terms.emplace_back(b, c);
  q.offset += p * Rational(f.constant * f.constant);
  for (std::size_t a = 0; a < terms.size(); ++a) {
    const auto [ba, ca] = terms[a];
    q.linear[ba] += p * Rational(ca * ca + 2 * ca * f.constant);
    for (std::size_t b = a + 1; b < terms.size(); ++b)
      q.quadratic[{ba, terms[b].first}] += p * Rational(2 * ca * terms[b].second);
  }
}

}  // namespace detail

/// Exact QUBO: objective + penalty * (sum of squared equality residuals +
/// sum of squared inequality residuals after subtracting the slack).
inline std::pair<ExactQubo, Encoding> lp_to_exact_qubo(const LinearProgram& lp, const Rational& penalty) {
  if (penalty <= 0) throw std::invalid_argument("penalty must be positive");
  Encoding enc = make_encoding(lp);
  ExactQubo q(enc.n_bits);
  for (const auto& [v, c] : lp.objective) {
    const auto& e = enc.vars[v];
    q.offset += c * Rational(e.offset);
    for (const auto& [bit, w] : e.bits) q.linear[bit] += c * Rational(w);
  }
  auto row_form = [&](const LinearConstraint& c) {
    detail::BitForm f;
    for (const auto& t : c.terms) f.add(enc.vars[t.var], t.coeff);
    f.constant -= c.rhs;
    return f;
  };
  for (const auto& c : lp.equalities) detail::add_squared(q, row_form(c), penalty);
  for (std::size_t i = 0; i < lp.inequalities.size(); ++i) {
    auto f = row_form(lp.inequalities[i]);
    f.add(enc.slacks[i], -1);
    detail::add_squared(q, f, penalty);
  }
  q.drop_zeros();
  return {std::move(q), std::move(enc)};
}

template <class Scalar = double>
std::pair<BasicQubo<Scalar>, Encoding> lp_to_qubo(const LinearProgram& lp, const Rational& penalty) {
  auto [q, enc] = lp_to_exact_qubo(lp, penalty);
  if constexpr (std::is_same_v<Scalar, Rational>) return {std::move(q), std::move(enc)};
  else return {qubo_cast<Scalar>(q), std::move(enc)};
}

template <class Scalar = double>
std::pair<BasicQubo<Scalar>, Encoding> lp_to_qubo(const LinearProgram& lp) {
  return lp_to_qubo<Scalar>(lp, default_penalty(lp));
}

/// Bit-count bound: every integer costs ceil(log2(range + 1)) bits.
inline std::size_t qubo_bit_bound(const LinearProgram& lp, const Encoding& enc) {
  auto bits_for = [](std::int64_t range) {
    std::size_t b = 0;
    while ((std::int64_t{1} << b) < range + 1) ++b;
    return b;
  };
  std::size_t n = 0;
  std::int64_t max_slack = 0;
  std::size_t n_time = 0;
  Tick d_max = 0;
  for (const auto& v : lp.vars) {
    if (v.is_binary()) ++n;
    else {
      ++n_time;
      d_max = std::max(d_max, v.hi - v.lo);
    }
  }
  for (const auto& s : enc.slacks) max_slack = std::max(max_slack, s.range);
  return n + n_time * bits_for(d_max) + lp.inequalities.size() * bits_for(d_max + max_slack);
}

// ---------------------------------------------------------------------------
// Decoding

struct DecodedSample {
  std::vector<std::int64_t> values;  // parallel to LinearProgram::vars
  std::vector<std::int64_t> slacks;  // parallel to LinearProgram::inequalities
};

inline std::int64_t decode_integer(const IntegerEncoding& e, std::span<const std::uint8_t> bits) {
  std::int64_t v = e.offset;
  for (const auto& [bit, w] : e.bits) {
    if (bit >= bits.size()) throw std::invalid_argument("sample misses bit " + std::to_string(bit));
    if (bits[bit]) v += w;
  }
  return v;
}

/// Integer values are offset + weighted bits; feasibility is not checked.
inline DecodedSample decode_sample(const Encoding& enc, std::span<const std::uint8_t> bits) {
  if (bits.size() != enc.n_bits) throw std::invalid_argument("sample size does not match the encoding");
  DecodedSample d;
  for (const auto& e : enc.vars) d.values.push_back(decode_integer(e, bits));
  for (const auto& e : enc.slacks) d.slacks.push_back(decode_integer(e, bits));
  return d;
}

/// Greedy high-to-low bit fill; exact because the truncated weights reach
/// every value in [0, range].
inline void encode_integer(const IntegerEncoding& e, std::int64_t value, std::vector<std::uint8_t>& bits) {
  std::int64_t rest = value - e.offset;
  if (rest < 0 || rest > e.range)
    throw std::out_of_range("value " + std::to_string(value) + " outside the range of " + e.name);
  for (auto it = e.bits.rbegin(); it != e.bits.rend(); ++it) {
    const bool on = rest >= it->second;
    bits[it->first] = on;
    if (on) rest -= it->second;
  }
  if (rest != 0) throw std::logic_error("encoding cannot represent value");
}

/// Bits for the given LP values; each slack takes the value closest to the
/// row's surplus, so feasible assignments have zero penalty.
inline std::vector<std::uint8_t> encode_assignment(const LinearProgram& lp, const Encoding& enc,
                                                   std::span<const std::int64_t> values) {
  if (values.size() != lp.vars.size()) throw std::invalid_argument("assignment size mismatch");
  std::vector<std::uint8_t> bits(enc.n_bits, 0);
  for (std::size_t v = 0; v < values.size(); ++v) encode_integer(enc.vars[v], values[v], bits);
  for (std::size_t i = 0; i < lp.inequalities.size(); ++i) {
    const auto& c = lp.inequalities[i];
    std::int64_t surplus = -c.rhs;
    for (const auto& t : c.terms) surplus += t.coeff * values[t.var];
    encode_integer(enc.slacks[i], std::clamp<std::int64_t>(surplus, 0, enc.slacks[i].range), bits);
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Statistics and COO text

struct QuboStats {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  double edge_density = 0;
  std::size_t linear_fields = 0;
};

template <class Scalar>
QuboStats qubo_stats(const BasicQubo<Scalar>& q) {
  QuboStats st;
  std::vector<bool> used(q.n_bits, false);
  for (std::size_t i = 0; i < q.n_bits; ++i)
    if (q.linear[i] != Scalar(0)) used[i] = true;
  for (const auto& [ij, c] : q.quadratic) {
    if (c == Scalar(0)) continue;
    ++st.edges;
    used[ij.first] = used[ij.second] = true;
  }
  st.vertices = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
  if (st.vertices > 1)
    st.edge_density = static_cast<double>(st.edges) /
                      (static_cast<double>(st.vertices) * static_cast<double>(st.vertices - 1) / 2.0);
  const auto m = qubo_to_ising(q);
  st.linear_fields = static_cast<std::size_t>(
      std::count_if(m.h.begin(), m.h.end(), [](const Scalar& v) { return v != Scalar(0); }));
  return st;
}

namespace detail {

inline void write_number(std::ostream& os, double v) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
}

/// Reads "#offset v", "#variables n" and "i j value" lines; "i i" is linear.
template <class Sink>
std::size_t read_coo(std::istream& is, double& offset, Sink&& sink) {
  std::string line;
  std::size_t declared = 0, max_index = 0;
  bool any = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string key;
      ls >> key;
      if (key == "#offset") ls >> offset;
      else if (key == "#variables") ls >> declared;
      continue;
    }
    std::size_t i = 0, j = 0;
    double v = 0;
    if (!(ls >> i >> j >> v)) throw std::invalid_argument("coo line " + std::to_string(lineno) + " malformed");
    sink(i, j, v);
    max_index = std::max({max_index, i, j});
    any = true;
  }
  return std::max(declared, any ? max_index + 1 : 0);
}

}  // namespace detail

inline void write_qubo_coo(std::ostream& os, const Qubo& q) {
  os << "#offset ";
  detail::write_number(os, q.offset);
  os << "\n#variables " << q.n_bits << "\n";
  for (std::size_t i = 0; i < q.n_bits; ++i)
    if (q.linear[i] != 0) {
      os << i << ' ' << i << ' ';
      detail::write_number(os, q.linear[i]);
      os << '\n';
    }
  for (const auto& [ij, c] : q.quadratic) {
    os << ij.first << ' ' << ij.second << ' ';
    detail::write_number(os, c);
    os << '\n';
  }
}

inline void write_ising_coo(std::ostream& os, const Ising& m) {
  os << "#offset ";
  detail::write_number(os, m.offset);
  os << "\n#variables " << m.n_spins << "\n";
  for (std::size_t i = 0; i < m.n_spins; ++i)
    if (m.h[i] != 0) {
      os << i << ' ' << i << ' ';
      detail::write_number(os, m.h[i]);
      os << '\n';
    }
  for (const auto& [ij, c] : m.coupling) {
    os << ij.first << ' ' << ij.second << ' ';
    detail::write_number(os, c);
    os << '\n';
  }
}

inline Qubo read_qubo_coo(std::istream& is) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
  double offset = 0;
  const std::size_t n = detail::read_coo(is, offset, [&](auto i, auto j, double v) { entries.emplace_back(i, j, v); });
  Qubo q(n);
  q.offset = offset;
  for (const auto& [i, j, v] : entries) q.add_quadratic(i, j, v);
  return q;
}

inline Ising read_ising_coo(std::istream& is) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> entries;
  double offset = 0;
  const std::size_t n = detail::read_coo(is, offset, [&](auto i, auto j, double v) { entries.emplace_back(i, j, v); });
  Ising m(n);
  m.offset = offset;
  for (const auto& [i, j, v] : entries) {
    if (i == j) m.h[i] += v;
    else m.add_coupling(i, j, v);
  }
  return m;
}

}  // namespace agv
