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
#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "agv/agv.hpp"

namespace agv::testing {

/// Uniform zone and pass times; lanes between consecutive corridor zones.
inline AgvSpec make_agv(const std::string& id, std::vector<ZoneId> path, Tick release, Tick zone_time,
                        Tick pass_time, Rational weight = Rational(1)) {
  AgvSpec a;
  a.id = id;
  a.path = std::move(path);
  a.release = release;
  a.weight = weight;
  for (std::size_t k = 0; k < a.path.size(); ++k) {
    a.zone_time[a.path[k]] = zone_time;
    if (k + 1 < a.path.size()) a.pass_time[{a.path[k], a.path[k + 1]}] = pass_time;
  }
  return a;
}

inline Topology corridor(std::size_t n_zones, std::vector<std::size_t> single_lanes = {}) {
  Topology t;
  for (std::size_t i = 0; i < n_zones; ++i) t.zones.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i + 1 < n_zones; ++i) {
    const bool single = std::find(single_lanes.begin(), single_lanes.end(), i) != single_lanes.end();
    t.lanes.push_back({t.zones[i], t.zones[i + 1], single});
  }
  return t;
}

/// Two AGVs released together into one zone: 20 QUBO bits, optimum 3/2.
inline Instance shared_zone_toy(Rational weight_b = Rational(1)) {
  Instance inst;
  inst.topology = corridor(1);
  inst.d_max = 2;
  inst.headway_default = 0;
  inst.agvs.push_back(make_agv("a", {"s0"}, 0, 1, 0));
  inst.agvs.push_back(make_agv("b", {"s0"}, 0, 1, 0, weight_b));
  return inst;
}

/// Two AGVs crossing head-on over the single lane s1-s2 of a 4-zone corridor.
inline Instance crossing_toy() {
  Instance inst;
  inst.topology = corridor(4, {1});
  inst.d_max = 4;
  inst.headway_default = 1;
  inst.agvs.push_back(make_agv("a", {"s0", "s1", "s2"}, 0, 1, 1));
  inst.agvs.push_back(make_agv("b", {"s3", "s2", "s1"}, 0, 1, 1));
  return inst;
}

/// Two AGVs following each other along s0 -> s1 -> s2.
inline Instance following_toy() {
  Instance inst;
  inst.topology = corridor(4);
  inst.d_max = 4;
  inst.headway_default = 2;
  inst.agvs.push_back(make_agv("a", {"s0", "s1", "s2"}, 0, 1, 1));
  inst.agvs.push_back(make_agv("b", {"s0", "s1", "s2", "s3"}, 1, 1, 1));
  return inst;
}

inline Instance single_agv() {
  Instance inst;
  inst.topology = corridor(4);
  inst.d_max = 40;
  inst.headway_default = 2;
  inst.agvs.push_back(make_agv("solo", {"s0", "s1", "s2", "s3"}, 0, 2, 6));
  return inst;
}

/// Random time values inside the variable boxes, orders uniform.
inline std::vector<std::int64_t> random_assignment(const LinearProgram& lp, std::mt19937_64& rng) {
  std::vector<std::int64_t> v(lp.vars.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::uniform_int_distribution<std::int64_t>(lp.vars[i].lo, lp.vars[i].hi)(rng);
  return v;
}

inline std::vector<std::uint8_t> random_bits(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint8_t> x(n);
  for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1);
  return x;
}

inline std::vector<std::int8_t> to_spins(const std::vector<std::uint8_t>& x) {
  std::vector<std::int8_t> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? 1 : -1;
  return s;
}

/// Exhaustive minimum of a small QUBO by a Gray-code walk (one flip per step).
template <class Scalar>
std::pair<Scalar, std::vector<std::uint8_t>> qubo_argmin(const BasicQubo<Scalar>& q) {
  if (q.n_bits > 24) throw std::invalid_argument("qubo_argmin: too many bits");
  std::vector<std::vector<std::pair<std::size_t, Scalar>>> adj(q.n_bits);
  for (const auto& [ij, c] : q.quadratic) {
    adj[ij.first].emplace_back(ij.second, c);
    adj[ij.second].emplace_back(ij.first, c);
  }
  std::vector<std::uint8_t> x(q.n_bits, 0), best_x = x;
  std::vector<Scalar> field(q.linear);  // energy change of raising each bit
  Scalar e = q.offset, best = e;
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << q.n_bits); ++step) {
    const auto i = static_cast<std::size_t>(std::countr_zero(step));
    const bool up = !x[i];
    if (up) e += field[i];
    else e -= field[i];
    x[i] = up;
    for (const auto& [j, c] : adj[i]) {
      if (up) field[j] += c;
      else field[j] -= c;
    }
    if (e < best) {
      best = e;
      best_x = x;
    }
  }
  return {best, best_x};
}

inline double ising_ground(const Ising& m) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::int8_t> s(m.n_spins);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m.n_spins); ++mask) {
    for (std::size_t i = 0; i < m.n_spins; ++i) s[i] = ((mask >> i) & 1) ? 1 : -1;
    best = std::min(best, m.energy(s));
  }
  return best;
}

/// Dense random Ising model with couplings and fields uniform in [-1, 1].
inline Ising random_ising(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Ising m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.h[i] = u(rng);
    for (std::size_t j = i + 1; j < n; ++j) m.coupling[{i, j}] = u(rng);
  }
  return m;
}

}  // namespace agv::testing
