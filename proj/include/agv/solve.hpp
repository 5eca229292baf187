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

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "agv/anneal.hpp"
#include "agv/exact.hpp"
#include "agv/ilp.hpp"
#include "agv/qubo.hpp"
#include "agv/verify.hpp"

namespace agv {

/// String-keyed solver parameters ("--params k=v,k2=v2"). Every key must be
/// consumed by the solver, so typos are reported instead of ignored.
class SolverParams {
 public:
  SolverParams() = default;
  explicit SolverParams(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  static SolverParams parse(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string::npos) end = text.size();
      const std::string item = text.substr(start, end - start);
      if (!item.empty()) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("parameter '" + item + "' is not k=v");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
      }
      start = end + 1;
    }
    return SolverParams(std::move(kv));
  }

  double number(const std::string& key, double fallback) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("parameter " + key + "='" + it->second + "' is not a number");
    }
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw std::invalid_argument("parameter " + key + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }
  std::optional<std::string> text(const std::string& key) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
  }
  /// Keeps only the listed keys.
  SolverParams subset(const std::set<std::string>& keys) const {
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : kv_)
      if (keys.count(k)) kv[k] = v;
    return SolverParams(std::move(kv));
  }
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_) out.push_back(k);
    return out;
  }
  void require_all_used() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) throw std::invalid_argument("unknown parameter '" + k + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

inline const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names{"bnb", "oracle", "sa", "sbm"};
  return names;
}

/// Parameter keys each solver understands.
inline std::set<std::string> solver_param_keys(const std::string& solver) {
  if (solver == "bnb") return {"node_limit"};
  if (solver == "sa") return {"penalty", "sweeps", "restarts", "beta_start", "beta_end"};
  if (solver == "sbm") return {"penalty", "a0", "c0", "steps", "dt", "replicas", "variant"};
  return {};
}

inline SaConfig sa_config(const SolverParams& params, std::uint64_t seed) {
  SaConfig cfg;
  cfg.sweeps = params.count("sweeps", cfg.sweeps);
  cfg.restarts = params.count("restarts", cfg.restarts);
  cfg.seed = seed;
  if (params.text("beta_start") || params.text("beta_end")) {
    const BetaRange fallback;
    cfg.beta = BetaRange{params.number("beta_start", fallback.start), params.number("beta_end", fallback.end)};
  }
  return cfg;
}

inline SbmConfig sbm_config(const SolverParams& params, std::uint64_t seed) {
  SbmConfig cfg;
  cfg.a0 = params.number("a0", cfg.a0);
  if (params.text("c0")) cfg.c0 = params.number("c0", 1.0);
  cfg.steps = params.count("steps", cfg.steps);
  cfg.dt = params.number("dt", cfg.dt);
  cfg.replicas = params.count("replicas", cfg.replicas);
  cfg.seed = seed;
  if (auto v = params.text("variant")) {
    if (*v == "discrete") cfg.variant = SbmVariant::Discrete;
    else if (*v == "ballistic") cfg.variant = SbmVariant::Ballistic;
    else throw std::invalid_argument("variant must be discrete or ballistic");
  }
  return cfg;
}

/// Samples the QUBO of the LP, decodes every sample and keeps the feasible
/// schedules. Without a feasible sample the lowest-energy decoding is
/// reported (and flagged infeasible by the checker).
inline SolveReport solve_heuristic(const Instance& inst, const LinearProgram& lp, const std::string& solver,
                                   const SolverParams& params, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Rational penalty = default_penalty(lp);
  if (auto p = params.text("penalty")) penalty = parse_rational(*p);
  auto [qubo, enc] = lp_to_qubo<double>(lp, penalty);

  SamplePool pool;
  if (solver == "sa") {
    const auto cfg = sa_config(params, seed);
    params.require_all_used();
    pool = simulated_annealing(qubo, cfg);
  } else {
    const auto cfg = sbm_config(params, seed);
    params.require_all_used();
    pool = sbm_solve(qubo_to_ising(qubo), cfg);
  }

  SolveReport rep;
  rep.solver = solver;
  std::optional<Schedule> fallback;
  std::size_t n_feasible = 0;
  for (std::size_t i = 0; i < pool.samples.size(); ++i) {
    const auto& s = pool.samples[i];
    std::vector<std::uint8_t> bits(s.state.size());
    for (std::size_t b = 0; b < bits.size(); ++b) bits[b] = pool.spins ? (s.state[b] > 0) : (s.state[b] != 0);
    const auto decoded = decode_sample(enc, bits);
    Schedule sch = schedule_from_assignment(lp, decoded.values);
    if (i == pool.best) fallback = sch;
    if (check_schedule(inst, sch).empty()) {
      ++n_feasible;
      rep.pool.push_back({sch, objective_value(inst, sch)});
    }
  }
  rep.best = fallback;
  if (!rep.pool.empty())
    rep.best = std::min_element(rep.pool.begin(), rep.pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
                 return a.objective < b.objective;
               })->schedule;
  finalize_report(inst, rep);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<double> energies;
  for (const auto& s : pool.samples) energies.push_back(s.energy);
  rep.details = {{"qubo_bits", qubo.n_bits},
                 {"penalty", to_string(penalty)},
                 {"samples", pool.samples.size()},
                 {"feasible_samples", n_feasible},
                 {"best_energy", pool.best_sample().energy},
                 {"energies", energies},
                 {"diagnostics", pool.diagnostics}};
  return rep;
}

/// Runs one solver on an instance; the report is always re-validated.
inline SolveReport solve_instance(const Instance& inst, const std::string& solver, const SolverParams& params,
                                  std::uint64_t seed, double time_limit) {
  const auto lp = build_ilp(inst);
  if (solver == "bnb") {
    BnbConfig cfg;
    cfg.time_limit = time_limit;
    cfg.node_limit = params.count("node_limit", cfg.node_limit);
    params.require_all_used();
    return solve_bnb(inst, lp, cfg);
  }
  if (solver == "oracle") {
    params.require_all_used();
    return brute_force_oracle(inst, lp);
  }
  if (solver == "sa" || solver == "sbm") return solve_heuristic(inst, lp, solver, params, seed);
  throw std::invalid_argument("unknown solver '" + solver + "'");
}

}  // namespace agv
