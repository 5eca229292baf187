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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "agv/generate.hpp"
#include "agv/ilp.hpp"
#include "agv/instance.hpp"
#include "agv/qubo.hpp"
#include "agv/solve.hpp"
#include "agv/verify.hpp"

namespace agv::cli {

enum ExitCode : int { kFeasible = 0, kInfeasible = 2, kLimitNoIncumbent = 3, kInputError = 4 };

/// Bad user input; mapped to exit code 4.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << bytes;
}

inline std::vector<std::int64_t> split_ints(const std::string& text, char sep, const std::string& what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("malformed " + what + " '" + text + "'");
    }
  }
  return out;
}

/// A file path, "builtin:factory" or "gen:J,S,D,seed".
inline Instance resolve_instance(const std::string& spec) {
  if (spec == "builtin:factory") return factory_instance();
  if (spec.rfind("gen:", 0) == 0) {
    const auto v = split_ints(spec.substr(4), ',', "generator spec");
    if (v.size() != 4 || v[0] < 1 || v[1] < 2 || v[2] < 0 || v[3] < 0)
      throw InputError("generator spec must be gen:J,S,D,seed with J>=1, S>=2");
    return generate_instance(static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), v[2],
                             static_cast<std::uint64_t>(v[3]));
  }
  return load_instance(read_file(spec));
}

inline int exit_code(const SolveReport& rep) {
  switch (rep.status) {
    case SolveStatus::Feasible: return kFeasible;
    case SolveStatus::Infeasible: return kInfeasible;
    case SolveStatus::LimitNoIncumbent: return kLimitNoIncumbent;
  }
  return kInfeasible;
}

inline nlohmann::json size_report_json(const SizeReport& r) {
  return {{"n_int", r.n_int},           {"n_bin", r.n_bin},           {"n_vars", r.n_vars()},
          {"n_eq", r.n_eq},             {"n_ineq", r.n_ineq},         {"bound_vars", r.bound_vars},
          {"bound_eq", r.bound_eq},     {"bound_ineq", r.bound_ineq}, {"within_bounds", r.within_bounds()},
          {"by_kind", r.by_kind}};
}

inline const char* kBenchHeader =
    "n_agvs,n_zones,d_max,seed,n_int,n_bin,n_eq,n_ineq,bound_vars,bound_eq,bound_ineq,solver,wall_s,objective,"
    "feasible,certified";

struct BenchCell {
  std::size_t n_agvs = 0;
  std::size_t n_zones = 0;
  Tick d_max = 0;
};

/// "J,S,D;J,S,D;..."
inline std::vector<BenchCell> parse_grid(const std::string& text) {
  std::vector<BenchCell> cells;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto v = split_ints(item, ',', "grid cell");
    if (v.size() != 3 || v[0] < 1 || v[1] < 2 || v[2] < 0) throw InputError("grid cell '" + item + "' must be J,S,D");
    cells.push_back({static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), v[2]});
  }
  if (cells.empty()) throw InputError("empty grid");
  return cells;
}

/// One CSV row per (cell, seed, solver), in grid order.
inline std::string run_bench(const std::vector<BenchCell>& grid, std::size_t n_seeds,
                             const std::vector<std::string>& solvers, const SolverParams& params, double time_limit) {
  // Each solver sees only its own keys; a key nobody accepts is an error.
  for (const auto& key : params.keys()) {
    const bool known = std::any_of(solvers.begin(), solvers.end(),
                                   [&](const std::string& s) { return solver_param_keys(s).count(key) > 0; });
    if (!known) throw InputError("no selected solver accepts parameter '" + key + "'");
  }
  std::ostringstream csv;
  csv << kBenchHeader << '\n';
  for (const auto& cell : grid) {
    for (std::size_t seed = 0; seed < n_seeds; ++seed) {
      const auto inst = generate_instance(cell.n_agvs, cell.n_zones, cell.d_max, seed);
      const auto sizes = size_report(inst, build_ilp(inst));
      for (const auto& solver : solvers) {
        SolveReport rep;
        std::string objective;
        try {
          rep = solve_instance(inst, solver, params.subset(solver_param_keys(solver)), seed, time_limit);
          if (rep.best) objective = to_string(rep.objective);
        } catch (const std::invalid_argument& e) {
          // Oracle refuses instances with too many order variables.
          if (solver != "oracle") throw;
          rep.status = SolveStatus::LimitNoIncumbent;
        }
        std::ostringstream wall;
        wall << std::fixed << std::setprecision(4) << rep.wall_time;
        csv << cell.n_agvs << ',' << cell.n_zones << ',' << cell.d_max << ',' << seed << ',' << sizes.n_int << ','
            << sizes.n_bin << ',' << sizes.n_eq << ',' << sizes.n_ineq << ',' << sizes.bound_vars << ','
            << sizes.bound_eq << ',' << sizes.bound_ineq << ',' << solver << ',' << wall.str() << ',' << objective
            << ',' << (rep.feasible ? 1 : 0) << ',' << (rep.certified ? 1 : 0) << '\n';
      }
    }
  }
  return csv.str();
}

/// Entry point of the `agv` tool. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"AGV zone scheduling: ILP model, QUBO/Ising transcription, exact and heuristic solvers"};
  app.require_subcommand(1);

  std::string instance, solver = "bnb", out_path, params_text, schedule_path, diagram_path, to = "qubo", grid,
                        model_path, model_kind = "ising";
  std::uint64_t seed = 0;
  double time_limit = 60.0;
  std::size_t n_seeds = 1;

  auto* build = app.add_subcommand("build", "Write the LP model and its size report");
  build->add_option("--instance", instance, "Instance file, builtin:factory or gen:J,S,D,seed")->required();
  build->add_option("--out", out_path, "Output directory for model.lp and sizes.json");

  auto* solve = app.add_subcommand("solve", "Solve an instance (or sample a raw COO model)");
  solve->add_option("--instance", instance, "Instance file, builtin:factory or gen:J,S,D,seed");
  solve->add_option("--model", model_path, "COO model to sample instead of an instance");
  solve->add_option("--kind", model_kind, "Kind of --model: qubo or ising")->check(CLI::IsMember({"qubo", "ising"}));
  solve->add_option("--solver", solver, "bnb, oracle, sa or sbm")->check(CLI::IsMember(solver_names()));
  solve->add_option("--seed", seed, "Sampler seed");
  solve->add_option("--time-limit", time_limit, "Branch-and-bound limit in seconds");
  solve->add_option("--params", params_text, "Solver parameters k=v,...");
  solve->add_option("--out", out_path, "Report JSON path (stdout if omitted)");
  solve->add_option("--diagram", diagram_path, "Also write an SVG diagram of the best schedule");

  auto* convert = app.add_subcommand("convert", "Export the QUBO or Ising model as COO text");
  convert->add_option("--instance", instance, "Instance")->required();
  convert->add_option("--to", to, "qubo or ising")->check(CLI::IsMember({"qubo", "ising"}));
  convert->add_option("--params", params_text, "penalty=p/q");
  convert->add_option("--out", out_path, "COO output path (stdout if omitted)");

  auto* check = app.add_subcommand("check", "Validate a schedule against an instance");
  check->add_option("--instance", instance, "Instance")->required();
  check->add_option("--schedule", schedule_path, "Schedule or report JSON")->required();

  auto* bench = app.add_subcommand("bench", "Benchmark generated instances over a size grid");
  bench->add_option("--grid", grid, "Cells J,S,D separated by ';'")->required();
  bench->add_option("--seeds", n_seeds, "Seeds 0..n-1 per cell");
  bench->add_option("--solver", solver, "Comma-separated solvers");
  bench->add_option("--time-limit", time_limit, "Per-run branch-and-bound limit in seconds");
  bench->add_option("--params", params_text, "Solver parameters k=v,...");
  bench->add_option("--out", out_path, "CSV path (stdout if omitted)");

  auto* diagram = app.add_subcommand("diagram", "Render a schedule as an SVG space-time diagram");
  diagram->add_option("--instance", instance, "Instance")->required();
  diagram->add_option("--schedule", schedule_path, "Schedule or report JSON")->required();
  diagram->add_option("--out", out_path, "SVG path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  auto emit = [&](const std::string& bytes) {
    if (out_path.empty()) out << bytes;
    else write_file(out_path, bytes);
  };

  try {
    const auto params = SolverParams::parse(params_text);
    if (*build) {
      const auto inst = resolve_instance(instance);
      const auto lp = build_ilp(inst);
      const auto sizes = size_report_json(size_report(inst, lp));
      if (out_path.empty()) {
        out << sizes.dump(2) << '\n';
      } else {
        write_file(out_path + "/model.lp", to_lp_text(lp));
        write_file(out_path + "/sizes.json", sizes.dump(2) + "\n");
      }
      return kFeasible;
    }
    if (*solve) {
      if (!model_path.empty()) {
        std::istringstream coo(read_file(model_path));
        Qubo q;
        Ising m;
        if (model_kind == "ising") {
          m = read_ising_coo(coo);
          q = ising_to_qubo(m);
        } else {
          q = read_qubo_coo(coo);
          m = qubo_to_ising(q);
        }
        SamplePool pool;
        if (solver == "sa") {
          const auto cfg = sa_config(params, seed);
          params.require_all_used();
          pool = simulated_annealing(q, cfg);
        } else if (solver == "sbm") {
          const auto cfg = sbm_config(params, seed);
          params.require_all_used();
          pool = sbm_solve(m, cfg);
        } else {
          throw InputError("raw models can be sampled with sa or sbm only");
        }
        emit(pool_to_json(pool).dump(2) + "\n");
        return kFeasible;
      }
      if (instance.empty()) throw InputError("solve needs --instance or --model");
      const auto inst = resolve_instance(instance);
      const auto rep = solve_instance(inst, solver, params, seed, time_limit);
      emit(report_to_json(inst, rep).dump(2) + "\n");
      if (!diagram_path.empty() && rep.best) write_file(diagram_path, render_diagram(inst, *rep.best));
      err << rep.solver << ": " << status_name(rep.status) << ", objective " << to_string(rep.objective)
          << (rep.certified ? " (certified)" : "") << '\n';
      return exit_code(rep);
    }
    if (*convert) {
      const auto inst = resolve_instance(instance);
      const auto lp = build_ilp(inst);
      Rational penalty = default_penalty(lp);
      if (auto p = params.text("penalty")) penalty = parse_rational(*p);
      params.require_all_used();
      const auto q = lp_to_qubo<double>(lp, penalty).first;
      std::ostringstream os;
      if (to == "qubo") write_qubo_coo(os, q);
      else write_ising_coo(os, qubo_to_ising(q));
      emit(os.str());
      return kFeasible;
    }
    if (*check) {
      const auto inst = resolve_instance(instance);
      const auto sch = schedule_from_json(inst, nlohmann::json::parse(read_file(schedule_path)));
      const auto violations = check_schedule(inst, sch);
      for (const auto& v : violations) out << v.code << ": " << v.message << '\n';
      out << (violations.empty() ? "feasible" : "infeasible") << ", objective " << to_string(objective_value(inst, sch))
          << '\n';
      return violations.empty() ? kFeasible : kInfeasible;
    }
    if (*bench) {
      std::vector<std::string> solvers;
      std::stringstream ss(solver);
      std::string s;
      while (std::getline(ss, s, ','))
        if (!s.empty()) {
          if (std::find(solver_names().begin(), solver_names().end(), s) == solver_names().end())
            throw InputError("unknown solver '" + s + "'");
          solvers.push_back(s);
        }
      emit(run_bench(parse_grid(grid), n_seeds, solvers, params, time_limit));
      return kFeasible;
    }
    if (*diagram) {
      const auto inst = resolve_instance(instance);
      const auto sch = schedule_from_json(inst, nlohmann::json::parse(read_file(schedule_path)));
      emit(render_diagram(inst, sch));
      return kFeasible;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InstanceError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  }
  return kInputError;
}

}  // namespace agv::cli
