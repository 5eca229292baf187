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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agv/qubo.hpp"

namespace agv {

struct Sample {
  std::vector<std::int8_t> state;  // bits (0/1) or spins (-1/+1), see SamplePool::spins
  double energy = 0;
  std::size_t replica = 0;
};

struct SamplePool {
  std::vector<Sample> samples;  // one per replica, in replica order
  std::size_t best = 0;
  bool spins = false;
  std::vector<std::string> diagnostics;
  // Final continuous state per replica, kept only on request.
  std::vector<std::vector<double>> final_position;
  std::vector<std::vector<double>> final_momentum;

  const Sample& best_sample() const {
    if (samples.empty()) throw std::logic_error("empty sample pool");
    return samples[best];
  }
};

inline nlohmann::json pool_to_json(const SamplePool& pool) {
  nlohmann::json out;
  out["spins"] = pool.spins;
  out["best"] = pool.best;
  out["samples"] = nlohmann::json::array();
  for (const auto& s : pool.samples)
    out["samples"].push_back({{"replica", s.replica}, {"energy", s.energy}, {"state", s.state}});
  out["diagnostics"] = pool.diagnostics;
  return out;
}

namespace detail {

/// Number of worker threads: AGV_THREADS if set, else the hardware count.
inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AGV_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs body(i) for i in [0, jobs); each index owns its output slot so the
/// result does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t jobs, Body&& body) {
  const std::size_t workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < jobs; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

inline std::mt19937_64 replica_rng(std::uint64_t seed, std::size_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  return std::mt19937_64(seq);
}

/// Symmetric sparse matrix in adjacency-list form.
struct Adjacency {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  explicit Adjacency(std::size_t n) : rows(n) {}
  void add(std::size_t i, std::size_t j, double v) {
    rows[i].emplace_back(j, v);
    rows[j].emplace_back(i, v);
  }
};

inline void pick_best(SamplePool& pool) {
  pool.best = 0;
  for (std::size_t i = 1; i < pool.samples.size(); ++i)
    if (pool.samples[i].energy < pool.samples[pool.best].energy) pool.best = i;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Simulated annealing

struct BetaRange {
  double start = 0.1;
  double end = 10.0;
};

/// Both ends are keyed to the smallest nonzero coefficient magnitude, which
/// for penalty QUBOs is the unit penalty step: the hot end accepts such an
/// uphill flip with probability 1/2, the cold end with probability 1e-6.
inline BetaRange default_beta_range(const Qubo& q) {
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : q.linear)
    if (v != 0) smallest = std::min(smallest, std::fabs(v));
  for (const auto& [ij, c] : q.quadratic)
    if (c != 0) smallest = std::min(smallest, std::fabs(c));
  if (!std::isfinite(smallest)) return {};
  return {std::log(2.0) / smallest, std::log(1.0e6) / smallest};
}

struct SaConfig {
  std::size_t sweeps = 1000;
  std::size_t restarts = 64;
  std::uint64_t seed = 0;
  std::optional<BetaRange> beta;  // default_beta_range when empty
};

/// Metropolis single-bit flips with a geometric inverse-temperature ramp;
/// each restart contributes the best end-of-sweep state it visited.
inline SamplePool simulated_annealing(const Qubo& q, const SaConfig& cfg) {
  if (cfg.sweeps == 0 || cfg.restarts == 0) throw std::invalid_argument("sweeps and restarts must be positive");
  const BetaRange beta = cfg.beta.value_or(default_beta_range(q));
  detail::Adjacency adj(q.n_bits);
  for (const auto& [ij, c] : q.quadratic) adj.add(ij.first, ij.second, c);

  SamplePool pool;
  pool.samples.resize(cfg.restarts);
  detail::parallel_for(cfg.restarts, [&](std::size_t r) {
    auto rng = detail::replica_rng(cfg.seed, r);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = q.n_bits;
    std::vector<std::int8_t> x(n);
    for (auto& b : x) b = static_cast<std::int8_t>(rng() & 1);
    // field[i] = linear_i + sum_j b_ij x_j; flipping i changes energy by (1 - 2 x_i) * field[i].
    std::vector<double> field(q.linear.begin(), q.linear.end());
    for (std::size_t i = 0; i < n; ++i)
      if (x[i])
        for (const auto& [j, c] : adj.rows[i]) field[j] += c;
    double e = q.energy(std::span<const std::int8_t>(x));
    double best_e = e;
    std::vector<std::int8_t> best_x = x;
    const double ratio = cfg.sweeps > 1 ? std::pow(beta.end / beta.start, 1.0 / static_cast<double>(cfg.sweeps - 1)) : 1.0;
    double b = beta.start;
    for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep, b *= ratio) {
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = (x[i] ? -1.0 : 1.0) * field[i];
        if (delta > 0 && unit(rng) >= std::exp(-b * delta)) continue;
        const double sign = x[i] ? -1.0 : 1.0;
        x[i] = static_cast<std::int8_t>(1 - x[i]);
        for (const auto& [j, c] : adj.rows[i]) field[j] += sign * c;
        e += delta;
      }
      if (e < best_e - 1e-9) {
        best_e = e;
        best_x = x;
      }
    }
    pool.samples[r] = {best_x, q.energy(std::span<const std::int8_t>(best_x)), r};
  });
  detail::pick_best(pool);
  return pool;
}

// ---------------------------------------------------------------------------
// Simulated bifurcation

enum class SbmVariant { Discrete, Ballistic };

struct LambdaEstimate {
  double value = 0;
  bool zero = false;  // coupling matrix vanishes
  std::size_t iterations = 0;
};

/// Dominant eigenvalue magnitude of the symmetric coupling matrix by power
/// iteration (relative tolerance 1e-6, at most 10^4 iterations).
inline LambdaEstimate estimate_lambda_max(const Ising& m) {
  LambdaEstimate est;
  detail::Adjacency adj(m.n_spins);
  bool any = false;
  for (const auto& [ij, c] : m.coupling)
    if (c != 0) {
      adj.add(ij.first, ij.second, c);
      any = true;
    }
  if (!any) {
    est.zero = true;
    return est;
  }
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> init(0.5, 1.5);
  std::vector<double> v(m.n_spins), w(m.n_spins);
  for (auto& x : v) x = init(rng);
  auto normalize = [](std::vector<double>& a) {
    double s = 0;
    for (double x : a) s += x * x;
    s = std::sqrt(s);
    for (double& x : a) x /= s;
    return s;
  };
  normalize(v);
  double prev = 0;
  for (std::size_t it = 1; it <= 10000; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < m.n_spins; ++i)
      for (const auto& [j, c] : adj.rows[i]) w[i] += c * v[j];
    const double lambda = normalize(w);
    std::swap(v, w);
    est.iterations = it;
    est.value = lambda;
    if (lambda == 0) {
      est.zero = true;
      return est;
    }
    if (it > 1 && std::fabs(lambda - prev) <= 1e-6 * lambda) break;
    prev = lambda;
  }
  return est;
}

struct SbmConfig {
  double a0 = 1.0;
  std::optional<double> c0;  // 1 / lambda_max when empty
  std::size_t steps = 1000;
  double dt = 0.5;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
  SbmVariant variant = SbmVariant::Discrete;
  bool keep_state = false;
};

/// Integrates the bifurcation dynamics with symplectic Euler and inelastic
/// walls at |q| = 1. Minimises the Ising energy by driving the dynamics with
/// J' = -J and h' = -h. Spins are sign(q) at the end of the run.
inline SamplePool sbm_solve(const Ising& m, const SbmConfig& cfg) {
  if (m.n_spins == 0) throw std::invalid_argument("sbm: empty model");
  if (cfg.steps == 0 || !(cfg.dt > 0) || cfg.replicas == 0) throw std::invalid_argument("sbm: invalid config");
  double c0 = 1.0;
  std::string c0_note;
  if (cfg.c0) {
    c0 = *cfg.c0;
  } else {
    const auto est = estimate_lambda_max(m);
    if (est.zero) c0_note = "zero coupling matrix, c0 falls back to 1";
    else c0 = 1.0 / est.value;
  }
  const std::size_t n = m.n_spins;
  detail::Adjacency adj(n);
  for (const auto& [ij, c] : m.coupling) adj.add(ij.first, ij.second, -c);

  SamplePool pool;
  pool.spins = true;
  pool.samples.resize(cfg.replicas);
  std::vector<std::string> failures(cfg.replicas);
  std::vector<std::uint8_t> ok(cfg.replicas, 1);
  if (cfg.keep_state) {
    pool.final_position.resize(cfg.replicas);
    pool.final_momentum.resize(cfg.replicas);
  }
  detail::parallel_for(cfg.replicas, [&](std::size_t r) {
    auto rng = detail::replica_rng(cfg.seed, r);
    std::uniform_real_distribution<double> noise(-0.1, 0.1);
    std::vector<double> q(n), p(n), force(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = noise(rng);
      p[i] = noise(rng);
    }
    const bool discrete = cfg.variant == SbmVariant::Discrete;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
      const double a = cfg.a0 * static_cast<double>(k + 1) / static_cast<double>(cfg.steps);
      for (std::size_t i = 0; i < n; ++i) {
        double f = -m.h[i];
        for (const auto& [j, c] : adj.rows[i]) f += c * (discrete ? (q[j] > 0 ? 1.0 : (q[j] < 0 ? -1.0 : 0.0)) : q[j]);
        force[i] = f;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double restoring = discrete ? (cfg.a0 - a) : (q[i] * q[i] + cfg.a0 - a);
        p[i] += cfg.dt * (-restoring * q[i] + c0 * force[i]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        q[i] += cfg.dt * cfg.a0 * p[i];
        if (std::fabs(q[i]) > 1.0) {
          q[i] = q[i] > 0 ? 1.0 : -1.0;
          p[i] = 0.0;
        }
        if (!std::isfinite(q[i]) || !std::isfinite(p[i])) {
          ok[r] = 0;
          failures[r] = "replica " + std::to_string(r) + " diverged at step " + std::to_string(k);
          return;
        }
      }
    }
    std::vector<std::int8_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = q[i] >= 0 ? 1 : -1;
    pool.samples[r] = {s, m.energy(std::span<const std::int8_t>(s)), r};
    if (cfg.keep_state) {
      pool.final_position[r] = q;
      pool.final_momentum[r] = p;
    }
  });
  std::vector<Sample> kept;
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    if (ok[r]) kept.push_back(std::move(pool.samples[r]));
    else pool.diagnostics.push_back(failures[r]);
  }
  pool.samples = std::move(kept);
  if (!c0_note.empty()) pool.diagnostics.push_back(c0_note);
  if (pool.samples.empty()) throw std::runtime_error("sbm: every replica diverged");
  detail::pick_best(pool);
  return pool;
}

/// Spins to bits: x = (s + 1) / 2.
inline std::vector<std::uint8_t> spins_to_bits(std::span<const std::int8_t> s) {
  std::vector<std::uint8_t> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = s[i] > 0 ? 1 : 0;
  return x;
}

}  // namespace agv
