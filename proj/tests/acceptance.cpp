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

// Acceptance checks. `acceptance N` runs criterion N, `acceptance` runs all;
// each prints one "criterion N: PASS|FAIL ..." line.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "agv/cli.hpp"
#include "fixtures.hpp"

namespace agv {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// Model sizes of the reference factory instance.
Outcome factory_sizes() {
  const auto lp = build_ilp(factory_instance());
  const bool ok = lp.n_integer() == 48 && lp.n_binary() == 70 && lp.equalities.size() == 55 &&
                  lp.inequalities.size() == 127;
  return {ok, "int " + std::to_string(lp.n_integer()) + " bin " + std::to_string(lp.n_binary()) + " eq " +
                  std::to_string(lp.equalities.size()) + " ineq " + std::to_string(lp.inequalities.size())};
}

Outcome grid_bounds() {
  std::size_t cases = 0;
  for (std::size_t j : {2, 4, 6, 7, 12, 15, 21})
    for (std::size_t s : {4, 7})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = size_bounds(generate_instance(j, s, 40, seed));
        ++cases;
        if (!r.within_bounds())
          return {false, std::to_string(j) + "/" + std::to_string(s) + " seed " + std::to_string(seed) +
                             " exceeds the analytic limits"};
      }
  return {true, std::to_string(cases) + " generated instances within limits"};
}

Outcome exact_solver() {
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; compared < 60 && seed < 1000; ++seed) {
    const std::size_t j = 2 + seed % 3;
    const std::size_t s = 3 + (seed / 3) % 3;
    const auto inst = generate_instance(j, s, 6 + static_cast<Tick>(seed % 7) * 2, seed);
    const auto lp = build_ilp(inst);
    if (order_groups(lp).size() > kOracleMaxGroups) continue;
    const auto a = solve_bnb(inst, lp);
    const auto b = brute_force_oracle(inst, lp);
    if (a.feasible != b.feasible || (b.feasible && (a.objective != b.objective || !a.certified)))
      return {false, "bnb disagrees with enumeration on seed " + std::to_string(seed)};
    ++compared;
  }
  const auto inst = factory_instance();
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = solve_bnb(inst, build_ilp(inst));
  const double wall = seconds_since(t0);
  const bool ok = compared >= 50 && rep.certified && rep.feasible && check_schedule(inst, *rep.best).empty() &&
                  wall < 60.0;
  return {ok, std::to_string(compared) + " oracle matches; reference optimum " + to_string(rep.objective) +
                  (rep.certified ? " certified" : " not certified") + " in " + fmt(wall) + " s"};
}

Outcome qubo_exactness() {
  std::vector<Instance> cases{testing::shared_zone_toy(), testing::shared_zone_toy(Rational(2)),
                              testing::shared_zone_toy(Rational(1, 3))};
  auto released = testing::shared_zone_toy();
  released.agvs[1].release = 1;
  cases.push_back(released);
  std::size_t states = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& inst = cases[c];
    const auto lp = build_ilp(inst);
    const Rational p = default_penalty(lp);
    const auto [q, enc] = lp_to_exact_qubo(lp, p);
    if (q.n_bits > 20) return {false, "case " + std::to_string(c) + " has " + std::to_string(q.n_bits) + " bits"};
    const auto optimum = brute_force_oracle(inst, lp);
    const auto [best, x] = testing::qubo_argmin(q);
    const auto d = decode_sample(enc, x);
    if (!optimum.feasible || best != optimum.objective || !eval_assignment(lp, d.values).empty())
      return {false, "case " + std::to_string(c) + ": argmin does not decode to the optimum"};
    std::vector<std::uint8_t> bits(q.n_bits);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << q.n_bits); ++mask, ++states) {
      for (std::size_t i = 0; i < q.n_bits; ++i) bits[i] = (mask >> i) & 1;
      const auto v = decode_sample(enc, bits).values;
      const Rational e = q.energy(bits), f = lp.objective_of(v);
      if (e < f || (e != f && e < f + p))
        return {false, "case " + std::to_string(c) + ": penalty gap below p"};
      if (e == f && !eval_assignment(lp, v).empty()) return {false, "infeasible state without penalty"};
    }
  }
  return {true, std::to_string(cases.size()) + " models, " + std::to_string(states) + " states scanned"};
}

Outcome ising_equivalence() {
  const auto lp = build_ilp(factory_instance());
  const auto q = lp_to_exact_qubo(lp, default_penalty(lp)).first;
  const auto m = qubo_to_ising(q);
  std::mt19937_64 rng(9);
  const std::size_t n = 150;
  for (std::size_t t = 0; t < n; ++t) {
    const auto x = testing::random_bits(q.n_bits, rng);
    if (q.energy(x) != m.energy(testing::to_spins(x))) return {false, "energies differ at sample " + std::to_string(t)};
  }
  return {true, std::to_string(n) + " random assignments agree exactly"};
}

Outcome qubo_sizes() {
  const auto st = qubo_stats(lp_to_qubo(build_ilp(factory_instance())).first);
  const bool verts = std::fabs(static_cast<double>(st.vertices) - 1204.0) <= 0.15 * 1204.0;
  const bool edges = std::fabs(static_cast<double>(st.edges) - 19084.0) <= 0.15 * 19084.0;
  auto mean_density = [](std::size_t j, std::size_t s) {
    double sum = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
      sum += qubo_stats(lp_to_qubo(build_ilp(generate_instance(j, s, 40, seed))).first).edge_density;
    return sum / 3;
  };
  const double d24 = mean_density(2, 4), d77 = mean_density(7, 7), d157 = mean_density(15, 7);
  const bool falling = d24 > d77 && d77 > d157;
  return {verts && edges && falling, "vertices " + std::to_string(st.vertices) + " edges " +
                                         std::to_string(st.edges) + " density 2/4 " + fmt(d24) + " 7/7 " +
                                         fmt(d77) + " 15/7 " + fmt(d157)};
}

Outcome sbm_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = testing::random_ising(8, 1000 + seed);
    SbmConfig cfg;
    cfg.seed = seed;
    if (sbm_solve(m, cfg).best_sample().energy <= testing::ising_ground(m) + 1e-9) ++hits;
  }
  Ising chain(8);
  for (std::size_t i = 0; i + 1 < 8; ++i) chain.add_coupling(i, i + 1, -1.0);
  const bool ferro = sbm_solve(chain, SbmConfig{}).best_sample().energy == -7.0;
  bool single = true;
  for (double h : {1.0, -1.0}) {
    Ising one(1);
    one.h[0] = h;
    single = single && sbm_solve(one, SbmConfig{}).best_sample().energy == -1.0;
  }
  const double wall = seconds_since(t0);
  return {hits >= 18 && ferro && single && wall < 120.0,
          std::to_string(hits) + "/20 ground states, ferromagnet " + (ferro ? "ok" : "missed") + ", single spin " +
              (single ? "ok" : "missed") + ", " + fmt(wall) + " s"};
}

Outcome sa_toy() {
  const auto inst = testing::crossing_toy();
  const auto lp = build_ilp(inst);
  const auto optimum = brute_force_oracle(inst, lp);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = solve_heuristic(inst, lp, "sa", SolverParams::parse("sweeps=1000,restarts=200"), 0);
  const double wall = seconds_since(t0);
  const bool ok = rep.feasible && check_schedule(inst, *rep.best).empty() && rep.objective == optimum.objective &&
                  wall < 30.0;
  return {ok, "annealed " + (rep.feasible ? to_string(rep.objective) : std::string("infeasible")) + ", optimum " +
                  to_string(optimum.objective) + ", " + fmt(wall) + " s"};
}

Outcome bench_schema() {
  // Hardware-annealer timings cannot be reproduced here; the benchmark table
  // they would populate must still be produced with its full schema.
  const auto csv = cli::run_bench(cli::parse_grid("2,4,10;3,4,10"), 2, {"bnb", "sa"},
                                  SolverParams::parse("sweeps=100,restarts=8"), 10.0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  if (line != cli::kBenchHeader) return {false, "unexpected header"};
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (std::count(line.begin(), line.end(), ',') + 1 != columns) return {false, "ragged row: " + line};
    ++rows;
  }
  return {rows == 8, std::to_string(rows) + " rows with " + std::to_string(columns) + " columns"};
}

const std::vector<std::function<Outcome()>>& criteria() {
  static const std::vector<std::function<Outcome()>> all{factory_sizes,  grid_bounds, exact_solver,
                                                         qubo_exactness,  ising_equivalence, qubo_sizes,
                                                         sbm_recovery,    sa_toy,      bench_schema};
  return all;
}

bool run_one(std::size_t n) {
  Outcome o;
  try {
    o = criteria()[n - 1]();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << std::endl;
  return o.pass;
}

}  // namespace
}  // namespace agv

int main(int argc, char** argv) {
  const std::size_t total = agv::criteria().size();
  if (argc > 2) {
    std::cerr << "usage: acceptance [criterion 1-" << total << "]\n";
    return 2;
  }
  if (argc == 2) {
    const long n = std::strtol(argv[1], nullptr, 10);
    if (n < 1 || static_cast<std::size_t>(n) > total) {
      std::cerr << "criterion must be between 1 and " << total << "\n";
      return 2;
    }
    return agv::run_one(static_cast<std::size_t>(n)) ? 0 : 1;
  }
  bool all = true;
  for (std::size_t n = 1; n <= total; ++n) all = agv::run_one(n) && all;
  return all ? 0 : 1;
}
