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
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "agv/ilp.hpp"
#include "agv/instance.hpp"
#include "agv/preprocess.hpp"
#include "agv/rational.hpp"

namespace agv {

/// Entering/leaving times indexed by AGV index and path position.
struct Schedule {
  std::vector<std::vector<Tick>> t_in;
  std::vector<std::vector<Tick>> t_out;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

inline Schedule schedule_from_assignment(const LinearProgram& lp, std::span<const std::int64_t> values) {
  Schedule s;
  for (std::size_t j = 0; j < lp.tin.size(); ++j) {
    s.t_in.emplace_back();
    s.t_out.emplace_back();
    for (std::size_t k = 0; k < lp.tin[j].size(); ++k) {
      s.t_in[j].push_back(values[lp.tin[j][k]]);
      s.t_out[j].push_back(values[lp.tout[j][k]]);
    }
  }
  return s;
}

/// Earliest times of every AGV ignoring the others.
inline Schedule earliest_schedule(const Instance& inst) {
  const auto win = compute_time_windows(inst);
  return {win.in_lo, win.out_lo};
}

/// A broken rule; `code` is one of window, mpt, mh, d, zc, no.
struct Violation {
  std::string code;
  std::string message;
  std::int64_t amount = 0;
  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

inline void require_complete(const Instance& inst, const Schedule& sch) {
  if (sch.t_in.size() != inst.agvs.size() || sch.t_out.size() != inst.agvs.size())
    throw std::invalid_argument("schedule does not cover every AGV");
  for (std::size_t j = 0; j < inst.agvs.size(); ++j)
    if (sch.t_in[j].size() != inst.agvs[j].path.size() || sch.t_out[j].size() != inst.agvs[j].path.size())
      throw std::invalid_argument("schedule misses zones of agv '" + inst.agvs[j].id + "'");
}

}  // namespace detail

/// Realized order at a zone both AGVs visit, derived from the times alone:
/// true iff j passes `zone` before jp.
inline bool passes_first(const Instance& inst, const Schedule& sch, std::size_t j, std::size_t jp,
                         const ZoneId& zone) {
  const std::size_t k = inst.agvs[j].position(zone);
  const std::size_t kp = inst.agvs[jp].position(zone);
  return std::tuple(sch.t_in[j][k], sch.t_out[j][k], j) < std::tuple(sch.t_in[jp][kp], sch.t_out[jp][kp], jp);
}

/// Checks every rule directly on the instance; order variables are never
/// consulted, orders are read from the realized times.
inline std::vector<Violation> check_schedule(const Instance& inst, const Schedule& sch) {
  detail::require_complete(inst, sch);
  std::vector<Violation> out;
  const auto win = compute_time_windows(inst);
  const std::size_t n = inst.agvs.size();
  auto at = [&](std::size_t j, const ZoneId& z) { return inst.agvs[j].position(z); };
  auto in = [&](std::size_t j, const ZoneId& z) { return sch.t_in[j][at(j, z)]; };
  auto outt = [&](std::size_t j, const ZoneId& z) { return sch.t_out[j][at(j, z)]; };
  auto interval = [&](std::size_t j, const ZoneId& z) {
    return "[" + std::to_string(in(j, z)) + "," + std::to_string(outt(j, z)) + "]";
  };

  for (std::size_t j = 0; j < n; ++j) {
    const auto& a = inst.agvs[j];
    for (std::size_t k = 0; k < a.path.size(); ++k) {
      for (const bool entering : {true, false}) {
        const Tick t = entering ? sch.t_in[j][k] : sch.t_out[j][k];
        const Tick lo = entering ? win.in_lo[j][k] : win.out_lo[j][k];
        if (t < lo || t > lo + inst.d_max)
          out.push_back({"window",
                         "agv " + a.id + (entering ? " enters " : " leaves ") + a.path[k] + " at " +
                             std::to_string(t) + " outside [" + std::to_string(lo) + "," +
                             std::to_string(lo + inst.d_max) + "]",
                         t < lo ? lo - t : t - lo - inst.d_max});
      }
      const Tick stay = sch.t_out[j][k] - sch.t_in[j][k] - a.zone_time.at(a.path[k]);
      if (stay < 0)
        out.push_back({"zc", "agv " + a.id + " stays in " + a.path[k] + " shorter than its zone time", -stay});
      if (k + 1 < a.path.size()) {
        const Tick gap = sch.t_in[j][k + 1] - sch.t_out[j][k] - a.pass_time.at({a.path[k], a.path[k + 1]});
        if (gap < 0)
          out.push_back({"mpt", "agv " + a.id + " passes " + a.path[k] + "->" + a.path[k + 1] + " too fast", -gap});
      }
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t jp = j + 1; jp < n; ++jp) {
      const auto& a = inst.agvs[j];
      const auto& b = inst.agvs[jp];
      for (const auto& z : inst.topology.zones) {
        if (!a.visits(z) || !b.visits(z)) continue;
        const bool j_first = passes_first(inst, sch, j, jp, z);
        const std::size_t first = j_first ? j : jp;
        const std::size_t second = j_first ? jp : j;
        const Tick gap = in(second, z) - outt(first, z);
        if (gap < 0)
          out.push_back({"zc",
                         "zone " + z + ": agv " + inst.agvs[first].id + " " + interval(first, z) + " overlaps agv " +
                             inst.agvs[second].id + " " + interval(second, z),
                         -gap});
      }

      for (std::size_t k = 0; k + 1 < a.path.size(); ++k) {
        const auto& s = a.path[k];
        const auto& sp = a.path[k + 1];
        const std::size_t pb = b.position(s);
        const bool same_dir = pb != AgvSpec::npos && pb + 1 < b.path.size() && b.path[pb + 1] == sp;
        if (same_dir) {
          const bool first_at_s = passes_first(inst, sch, j, jp, s);
          const bool first_at_sp = passes_first(inst, sch, j, jp, sp);
          if (first_at_s != first_at_sp)
            out.push_back({"no", "agvs " + a.id + " and " + b.id + " swap order between " + s + " and " + sp, 1});
          const std::size_t lead_s = first_at_s ? j : jp;
          const std::size_t follow_s = first_at_s ? jp : j;
          const Tick h_out = inst.headway(inst.agvs[lead_s].id, inst.agvs[follow_s].id, s, sp);
          const Tick gap_out = outt(follow_s, s) - outt(lead_s, s) - h_out;
          if (gap_out < 0)
            out.push_back({"mh",
                           "agv " + inst.agvs[follow_s].id + " leaves " + s + " within headway of agv " +
                               inst.agvs[lead_s].id,
                           -gap_out});
          const std::size_t lead_sp = first_at_sp ? j : jp;
          const std::size_t follow_sp = first_at_sp ? jp : j;
          const Tick h_in = inst.headway(inst.agvs[lead_sp].id, inst.agvs[follow_sp].id, s, sp);
          const Tick gap_in = in(follow_sp, sp) - in(lead_sp, sp) - h_in;
          if (gap_in < 0)
            out.push_back({"mh",
                           "agv " + inst.agvs[follow_sp].id + " enters " + sp + " within headway of agv " +
                               inst.agvs[lead_sp].id,
                           -gap_in});
        }

        const Lane* lane = inst.topology.find_lane(s, sp);
        const std::size_t pr = b.position(sp);
        const bool opposing = lane && lane->bidirectional && pr != AgvSpec::npos && pr + 1 < b.path.size() &&
                              b.path[pr + 1] == s;
        if (opposing) {
          // a: s -> sp, b: sp -> s over one shared lane.
          if (passes_first(inst, sch, j, jp, s) != passes_first(inst, sch, j, jp, sp))
            out.push_back({"d",
                           "agvs " + a.id + " and " + b.id + " cross on single lane " + s + "-" + sp +
                               " in inconsistent order",
                           1});
          const Tick a_on = outt(j, s), a_off = in(j, sp);
          const Tick b_on = outt(jp, sp), b_off = in(jp, s);
          if (b_on < a_off && a_on < b_off)
            out.push_back({"d",
                           "agvs " + a.id + " and " + b.id + " occupy single lane " + s + "-" + sp +
                               " head-on at the same time",
                           std::min(a_off - b_on, b_off - a_on)});
        }
      }
    }
  }
  return out;
}

/// Values for every LP variable: times from the schedule, order variables
/// from the realized order.
inline std::vector<std::int64_t> assignment_from_schedule(const Instance& inst, const LinearProgram& lp,
                                                          const Schedule& sch) {
  detail::require_complete(inst, sch);
  std::vector<std::int64_t> values(lp.vars.size(), 0);
  for (std::size_t j = 0; j < lp.tin.size(); ++j)
    for (std::size_t k = 0; k < lp.tin[j].size(); ++k) {
      values[lp.tin[j][k]] = sch.t_in[j][k];
      values[lp.tout[j][k]] = sch.t_out[j][k];
    }
  for (std::size_t v = 0; v < lp.vars.size(); ++v) {
    const auto& ref = lp.vars[v];
    if (ref.kind == VarKind::ZoneOrder || ref.kind == VarKind::LaneOrder)
      values[v] = passes_first(inst, sch, ref.j, ref.jp, ref.s) ? 1 : 0;
  }
  return values;
}

/// Weighted completion time: sum_j w_j * t_out(j, last zone) / d_max.
inline Rational objective_value(const Instance& inst, const Schedule& sch) {
  detail::require_complete(inst, sch);
  Rational f(0);
  for (std::size_t j = 0; j < inst.agvs.size(); ++j)
    f += inst.agvs[j].weight * Rational(sch.t_out[j].back(), inst.d_max);
  return f;
}

struct PoolStats {
  std::size_t count = 0;
  double best = 0;
  double mean = 0;
  double std = 0;  // population standard deviation
};

inline PoolStats pool_stats(std::span<const double> objectives) {
  if (objectives.empty()) throw std::invalid_argument("pool_stats: empty pool");
  PoolStats st;
  st.count = objectives.size();
  st.best = *std::min_element(objectives.begin(), objectives.end());
  double sum = 0;
  for (double v : objectives) sum += v;
  st.mean = sum / static_cast<double>(st.count);
  double sq = 0;
  for (double v : objectives) sq += (v - st.mean) * (v - st.mean);
  st.std = std::sqrt(sq / static_cast<double>(st.count));
  return st;
}

// ---------------------------------------------------------------------------
// Space-time diagram

/// SVG 1.1 space-time diagram: time on the horizontal axis, zones (in
/// topology order) on the vertical axis, one polyline per AGV through its
/// (t_in, zone) and (t_out, zone) points. Violations are drawn in red.
inline std::string render_diagram(const Instance& inst, const Schedule& sch) {
  detail::require_complete(inst, sch);
  static constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                             "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e"};
  const auto violations = check_schedule(inst, sch);
  const double left = 60, top = 30, row = 40, px_per_tick = 6;
  Tick t_max = 1;
  for (const auto& v : sch.t_out)
    for (Tick t : v) t_max = std::max(t_max, t);
  const double width = left + static_cast<double>(t_max) * px_per_tick + 140;
  const double height = top + row * static_cast<double>(inst.topology.zones.size()) + 40 +
                        14.0 * static_cast<double>(violations.size());
  auto x_of = [&](Tick t) { return left + static_cast<double>(t) * px_per_tick; };
  auto y_of = [&](const ZoneId& z) { return top + row * static_cast<double>(inst.topology.zone_index(z)) + row / 2; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
     << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  for (const auto& z : inst.topology.zones) {
    const double y = y_of(z);
    os << "<rect x=\"" << left << "\" y=\"" << y - row / 4 << "\" width=\"" << x_of(t_max) - left
       << "\" height=\"" << row / 2 << "\" fill=\"#f2f2f2\"/>\n"
       << "<text x=\"8\" y=\"" << y + 4 << "\" font-family=\"monospace\" font-size=\"12\">" << z << "</text>\n";
  }
  const double axis_y = top + row * static_cast<double>(inst.topology.zones.size());
  os << "<line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\"" << x_of(t_max) << "\" y2=\"" << axis_y
     << "\" stroke=\"black\"/>\n";
  const Tick step = std::max<Tick>(1, t_max / 10);
  for (Tick t = 0; t <= t_max; t += step)
    os << "<text x=\"" << x_of(t) << "\" y=\"" << axis_y + 14 << "\" font-family=\"monospace\" font-size=\"10\">"
       << t << "</text>\n";

  for (std::size_t j = 0; j < inst.agvs.size(); ++j) {
    const auto& a = inst.agvs[j];
    const char* color = kPalette[j % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < a.path.size(); ++k) {
      const double y = y_of(a.path[k]);
      os << (k ? " " : "") << x_of(sch.t_in[j][k]) << ',' << y << ' ' << x_of(sch.t_out[j][k]) << ',' << y;
    }
    os << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(j) + 4;
    os << "<text x=\"" << x_of(t_max) + 10 << "\" y=\"" << ly << "\" font-family=\"monospace\" font-size=\"11\" fill=\""
       << color << "\">" << a.id << "</text>\n";
  }
  for (std::size_t i = 0; i < violations.size(); ++i)
    os << "<text x=\"" << left << "\" y=\"" << axis_y + 30 + 14.0 * static_cast<double>(i)
       << "\" font-family=\"monospace\" font-size=\"11\" fill=\"red\">" << violations[i].code << ": "
       << violations[i].message << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Reports

enum class SolveStatus { Feasible, Infeasible, LimitNoIncumbent };

struct PoolEntry {
  Schedule schedule;
  Rational objective{0};
};

struct SolveReport {
  std::optional<Schedule> best;
  Rational objective{0};
  bool feasible = false;
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<Violation> violations;
  std::vector<PoolEntry> pool;
  double wall_time = 0;
  std::string solver;
  bool certified = false;
  nlohmann::json details = nlohmann::json::object();
};

/// Re-validates the best schedule and pool against the instance; the report
/// is feasible only if the checker finds nothing. Infeasible pool entries are
/// dropped and the pool is sorted by objective.
inline void finalize_report(const Instance& inst, SolveReport& rep) {
  rep.violations.clear();
  if (rep.best) {
    rep.violations = check_schedule(inst, *rep.best);
    rep.objective = objective_value(inst, *rep.best);
  } else {
    rep.violations.push_back({"none", "no schedule produced", 0});
  }
  rep.feasible = rep.violations.empty();
  if (!rep.feasible) {
    rep.certified = false;
    if (rep.status == SolveStatus::Feasible) rep.status = SolveStatus::Infeasible;
  } else {
    rep.status = SolveStatus::Feasible;
  }
  std::erase_if(rep.pool, [&](const PoolEntry& e) { return !check_schedule(inst, e.schedule).empty(); });
  for (auto& e : rep.pool) e.objective = objective_value(inst, e.schedule);
  std::stable_sort(rep.pool.begin(), rep.pool.end(),
                   [](const PoolEntry& x, const PoolEntry& y) { return x.objective < y.objective; });
}

inline nlohmann::json schedule_to_json(const Instance& inst, const Schedule& sch) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t j = 0; j < inst.agvs.size(); ++j) {
    nlohmann::json zones = nlohmann::json::array();
    for (std::size_t k = 0; k < inst.agvs[j].path.size(); ++k)
      zones.push_back({{"zone", inst.agvs[j].path[k]}, {"in", sch.t_in[j][k]}, {"out", sch.t_out[j][k]}});
    out.push_back({{"agv", inst.agvs[j].id}, {"zones", zones}});
  }
  return out;
}

/// Accepts either a bare schedule array or a report object with "schedule".
inline Schedule schedule_from_json(const Instance& inst, const nlohmann::json& doc) {
  const nlohmann::json& arr = doc.is_object() ? doc.at("schedule") : doc;
  if (!arr.is_array()) throw std::invalid_argument("schedule: expected array");
  Schedule sch;
  sch.t_in.resize(inst.agvs.size());
  sch.t_out.resize(inst.agvs.size());
  for (std::size_t j = 0; j < inst.agvs.size(); ++j) {
    sch.t_in[j].assign(inst.agvs[j].path.size(), 0);
    sch.t_out[j].assign(inst.agvs[j].path.size(), 0);
  }
  std::vector<std::vector<bool>> seen(inst.agvs.size());
  for (std::size_t j = 0; j < inst.agvs.size(); ++j) seen[j].assign(inst.agvs[j].path.size(), false);
  for (const auto& entry : arr) {
    const std::size_t j = inst.agv_index(entry.at("agv").get<std::string>());
    for (const auto& z : entry.at("zones")) {
      const std::size_t k = inst.agvs[j].position(z.at("zone").get<std::string>());
      if (k == AgvSpec::npos) throw std::invalid_argument("schedule: zone not on path of " + inst.agvs[j].id);
      sch.t_in[j][k] = z.at("in").get<Tick>();
      sch.t_out[j][k] = z.at("out").get<Tick>();
      seen[j][k] = true;
    }
  }
  for (std::size_t j = 0; j < inst.agvs.size(); ++j)
    for (std::size_t k = 0; k < seen[j].size(); ++k)
      if (!seen[j][k])
        throw std::invalid_argument("schedule: missing entry for " + inst.agvs[j].id + " at " + inst.agvs[j].path[k]);
  return sch;
}

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::LimitNoIncumbent: return "limit_no_incumbent";
  }
  return "?";
}

inline nlohmann::json report_to_json(const Instance& inst, const SolveReport& rep) {
  nlohmann::json out;
  out["solver"] = rep.solver;
  out["status"] = status_name(rep.status);
  out["feasible"] = rep.feasible;
  out["certified"] = rep.certified;
  out["objective"] = to_double(rep.objective);
  out["objective_exact"] = to_string(rep.objective);
  out["wall_time"] = rep.wall_time;
  out["schedule"] = rep.best ? schedule_to_json(inst, *rep.best) : nlohmann::json(nullptr);
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : rep.violations) viol.push_back({{"code", v.code}, {"message", v.message}, {"amount", v.amount}});
  out["violations"] = viol;
  nlohmann::json pool = nlohmann::json::array();
  std::vector<double> objectives;
  for (const auto& e : rep.pool) {
    pool.push_back({{"objective", to_double(e.objective)}, {"schedule", schedule_to_json(inst, e.schedule)}});
    objectives.push_back(to_double(e.objective));
  }
  out["pool"] = pool;
  if (!objectives.empty()) {
    const auto st = pool_stats(objectives);
    out["pool_stats"] = {{"count", st.count}, {"best", st.best}, {"mean", st.mean}, {"std", st.std}};
  }
  out["details"] = rep.details;
  return out;
}

}  // namespace agv
