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
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agv/instance.hpp"
#include "agv/preprocess.hpp"
#include "agv/rational.hpp"

namespace agv {

enum class VarKind { TimeIn, TimeOut, ZoneOrder, LaneOrder };

/// One ILP variable. Order variables are ordered pairs: ZoneOrder(j, jp, s)
/// is 1 iff j passes zone s before jp; LaneOrder(j, jp, s, sp) is 1 iff j
/// enters the single lane s->sp before jp enters it from the other end.
struct VariableRef {
  VarKind kind = VarKind::TimeIn;
  std::size_t j = 0;
  std::size_t jp = 0;
  ZoneId s;
  ZoneId sp;
  std::size_t pos = 0;  // path position, time variables only
  Tick lo = 0;
  Tick hi = 1;
  std::string name;

  bool is_binary() const { return kind == VarKind::ZoneOrder || kind == VarKind::LaneOrder; }
};

enum class ConstraintKind {
  PassTime,
  ZoneStay,
  ZoneExclusive,
  Headway,
  Deadlock,
  OrderAntisymmetry,
  NoOvertake,
  LaneLink,
  LaneAntisymmetry,
};

inline constexpr ConstraintKind kAllConstraintKinds[] = {
    ConstraintKind::PassTime,          ConstraintKind::ZoneStay,   ConstraintKind::ZoneExclusive,
    ConstraintKind::Headway,           ConstraintKind::Deadlock,   ConstraintKind::OrderAntisymmetry,
    ConstraintKind::NoOvertake,        ConstraintKind::LaneLink,   ConstraintKind::LaneAntisymmetry};

inline const char* kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::PassTime: return "pass_time";
    case ConstraintKind::ZoneStay: return "zone_stay";
    case ConstraintKind::ZoneExclusive: return "zone_exclusive";
    case ConstraintKind::Headway: return "headway";
    case ConstraintKind::Deadlock: return "deadlock";
    case ConstraintKind::OrderAntisymmetry: return "order_antisymmetry";
    case ConstraintKind::NoOvertake: return "no_overtake";
    case ConstraintKind::LaneLink: return "lane_link";
    case ConstraintKind::LaneAntisymmetry: return "lane_antisymmetry";
  }
  return "?";
}

/// Violation taxonomy code: window, mpt, mh, d, zc, no (plus "order" for the
/// pair antisymmetry identities).
inline const char* kind_code(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::PassTime: return "mpt";
    case ConstraintKind::ZoneStay:
    case ConstraintKind::ZoneExclusive: return "zc";
    case ConstraintKind::Headway: return "mh";
    case ConstraintKind::Deadlock:
    case ConstraintKind::LaneLink:
    case ConstraintKind::LaneAntisymmetry: return "d";
    case ConstraintKind::NoOvertake: return "no";
    case ConstraintKind::OrderAntisymmetry: return "order";
  }
  return "?";
}

struct Term {
  std::size_t var = 0;
  std::int64_t coeff = 0;
};

/// Equalities read sum(coeff * var) == rhs, inequalities sum(coeff * var) >= rhs.
struct LinearConstraint {
  ConstraintKind kind = ConstraintKind::PassTime;
  std::vector<Term> terms;
  std::int64_t rhs = 0;
  std::string label;
};

struct LinearProgram {
  std::vector<VariableRef> vars;
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;
  std::vector<std::pair<std::size_t, Rational>> objective;
  std::vector<AgvId> agv_ids;
  std::vector<std::vector<ZoneId>> paths;
  std::vector<std::vector<std::size_t>> tin;   // [agv][pos] -> var
  std::vector<std::vector<std::size_t>> tout;  // [agv][pos] -> var
  std::map<std::string, std::size_t> index;

  std::size_t find(const std::string& name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw std::out_of_range("unknown variable '" + name + "'");
    return it->second;
  }
  std::size_t n_integer() const {
    return static_cast<std::size_t>(
        std::count_if(vars.begin(), vars.end(), [](const VariableRef& v) { return !v.is_binary(); }));
  }
  std::size_t n_binary() const { return vars.size() - n_integer(); }

  /// Objective is a nonnegative combination of time variables.
  Rational objective_of(std::span<const std::int64_t> values) const {
    Rational f(0);
    for (const auto& [v, c] : objective) f += c * Rational(values[v]);
    return f;
  }
};

namespace detail {

class IlpBuilder {
 public:
  IlpBuilder(const Instance& inst, const TimeWindows& win) : inst_(inst), win_(win) {}

  std::size_t add_var(VariableRef v) {
    const std::size_t id = lp_.vars.size();
    if (!lp_.index.emplace(v.name, id).second)
      throw std::logic_error("duplicate ILP variable " + v.name);
    lp_.vars.push_back(std::move(v));
    return id;
  }

  std::size_t zone_order(std::size_t j, std::size_t jp, const ZoneId& s) const {
    return lp_.find(order_name(j, jp, s));
  }

  std::string order_name(std::size_t j, std::size_t jp, const ZoneId& s) const {
    return "y_" + id(j) + "_" + id(jp) + "_" + s;
  }
  std::string lane_name(std::size_t j, std::size_t jp, const ZoneId& s, const ZoneId& sp) const {
    return "z_" + id(j) + "_" + id(jp) + "_" + s + "_" + sp;
  }
  const std::string& id(std::size_t j) const { return inst_.agvs[j].id; }

  std::size_t t_in(std::size_t j, const ZoneId& s) const { return lp_.tin[j][inst_.agvs[j].position(s)]; }
  std::size_t t_out(std::size_t j, const ZoneId& s) const { return lp_.tout[j][inst_.agvs[j].position(s)]; }

  /// t_a - t_b + M * order >= c, with the tightest M that deactivates the
  /// row when order = 1 over the variable boxes.
  void add_big_m(ConstraintKind kind, std::size_t a, std::size_t b, std::int64_t c, std::size_t order,
                 std::string label) {
    const auto& va = lp_.vars[a];
    const auto& vb = lp_.vars[b];
    const std::int64_t big_m = std::max<std::int64_t>(0, vb.hi + c - va.lo) / big_m_divisor;
    lp_.inequalities.push_back({kind, {{a, 1}, {b, -1}, {order, big_m}}, c, std::move(label)});
  }

  LinearProgram build(const ConflictSets& conf);

  std::int64_t big_m_divisor = 1;

 private:
  const Instance& inst_;
  const TimeWindows& win_;
  LinearProgram lp_;
};

inline LinearProgram IlpBuilder::build(const ConflictSets& conf) {
  const std::size_t n = inst_.agvs.size();
  lp_.tin.resize(n);
  lp_.tout.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& a = inst_.agvs[j];
    lp_.agv_ids.push_back(a.id);
    lp_.paths.push_back(a.path);
    for (std::size_t k = 0; k < a.path.size(); ++k) {
      VariableRef vin{VarKind::TimeIn, j, j, a.path[k], {}, k, win_.in_lo[j][k], win_.in_hi(j, k),
                      "tin_" + a.id + "_" + a.path[k]};
      VariableRef vout{VarKind::TimeOut, j, j, a.path[k], {}, k, win_.out_lo[j][k], win_.out_hi(j, k),
                       "tout_" + a.id + "_" + a.path[k]};
      lp_.tin[j].push_back(add_var(std::move(vin)));
      lp_.tout[j].push_back(add_var(std::move(vout)));
    }
  }
  for (const auto& zp : conf.zone_pairs) {
    add_var({VarKind::ZoneOrder, zp.j, zp.jp, zp.zone, {}, 0, 0, 1, order_name(zp.j, zp.jp, zp.zone)});
    add_var({VarKind::ZoneOrder, zp.jp, zp.j, zp.zone, {}, 0, 0, 1, order_name(zp.jp, zp.j, zp.zone)});
  }
  for (const auto& oc : conf.opposing) {
    add_var({VarKind::LaneOrder, oc.j, oc.jp, oc.from, oc.to, 0, 0, 1, lane_name(oc.j, oc.jp, oc.from, oc.to)});
    add_var({VarKind::LaneOrder, oc.jp, oc.j, oc.to, oc.from, 0, 0, 1, lane_name(oc.jp, oc.j, oc.to, oc.from)});
  }

  // Minimal passing time between consecutive zones and minimal stay in a zone.
  for (std::size_t j = 0; j < n; ++j) {
    const auto& a = inst_.agvs[j];
    for (std::size_t k = 0; k + 1 < a.path.size(); ++k)
      lp_.inequalities.push_back({ConstraintKind::PassTime,
                                  {{lp_.tin[j][k + 1], 1}, {lp_.tout[j][k], -1}},
                                  a.pass_time.at({a.path[k], a.path[k + 1]}),
                                  "mpt_" + a.id + "_" + a.path[k] + "_" + a.path[k + 1]});
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto& a = inst_.agvs[j];
    for (std::size_t k = 0; k < a.path.size(); ++k)
      lp_.inequalities.push_back({ConstraintKind::ZoneStay,
                                  {{lp_.tout[j][k], 1}, {lp_.tin[j][k], -1}},
                                  a.zone_time.at(a.path[k]),
                                  "stay_" + a.id + "_" + a.path[k]});
  }

  // One AGV in a zone at a time: the second enters after the first leaves.
  for (const auto& zp : conf.zone_pairs) {
    for (const auto& [first, second] : {std::pair{zp.j, zp.jp}, std::pair{zp.jp, zp.j}}) {
      add_big_m(ConstraintKind::ZoneExclusive, t_in(second, zp.zone), t_out(first, zp.zone), 0,
                zone_order(second, first, zp.zone), "zc_" + id(first) + "_" + id(second) + "_" + zp.zone);
    }
  }

  // Headway between subsequent same-direction AGVs.
  for (const auto& run : conf.same_dir) {
    for (std::size_t k = 0; k + 1 < run.zones.size(); ++k) {
      const auto& s = run.zones[k];
      const auto& sp = run.zones[k + 1];
      for (const auto& [leader, follower] : {std::pair{run.j, run.jp}, std::pair{run.jp, run.j}}) {
        const Tick gap = inst_.headway(id(leader), id(follower), s, sp);
        add_big_m(ConstraintKind::Headway, t_out(follower, s), t_out(leader, s), gap,
                  zone_order(follower, leader, s),
                  "mh_out_" + id(leader) + "_" + id(follower) + "_" + s + "_" + sp);
        // The entry form at sp follows from zone exclusivity and the leader's
        // stay unless the headway exceeds that stay.
        if (gap > inst_.agvs[leader].zone_time.at(sp))
          add_big_m(ConstraintKind::Headway, t_in(follower, sp), t_in(leader, sp), gap,
                    zone_order(follower, leader, sp),
                    "mh_in_" + id(leader) + "_" + id(follower) + "_" + s + "_" + sp);
      }
    }
  }

  // Single shared lane: the opposing AGV departs only after the lane is clear.
  for (const auto& oc : conf.opposing) {
    add_big_m(ConstraintKind::Deadlock, t_out(oc.jp, oc.to), t_in(oc.j, oc.to), 0,
              lp_.find(lane_name(oc.jp, oc.j, oc.to, oc.from)),
              "d_" + id(oc.j) + "_" + id(oc.jp) + "_" + oc.from + "_" + oc.to);
    add_big_m(ConstraintKind::Deadlock, t_out(oc.j, oc.from), t_in(oc.jp, oc.from), 0,
              lp_.find(lane_name(oc.j, oc.jp, oc.from, oc.to)),
              "d_" + id(oc.jp) + "_" + id(oc.j) + "_" + oc.to + "_" + oc.from);
  }

  for (const auto& zp : conf.zone_pairs)
    lp_.equalities.push_back({ConstraintKind::OrderAntisymmetry,
                              {{zone_order(zp.j, zp.jp, zp.zone), 1}, {zone_order(zp.jp, zp.j, zp.zone), 1}},
                              1,
                              "order_" + id(zp.j) + "_" + id(zp.jp) + "_" + zp.zone});

  for (const auto& run : conf.same_dir) {
    for (std::size_t k = 0; k + 1 < run.zones.size(); ++k) {
      const auto& s = run.zones[k];
      const auto& sp = run.zones[k + 1];
      for (const auto& [x, y] : {std::pair{run.j, run.jp}, std::pair{run.jp, run.j}})
        lp_.equalities.push_back({ConstraintKind::NoOvertake,
                                  {{zone_order(x, y, s), 1}, {zone_order(x, y, sp), -1}},
                                  0,
                                  "no_" + id(x) + "_" + id(y) + "_" + s + "_" + sp});
    }
  }

  for (const auto& oc : conf.opposing) {
    const std::size_t z_fwd = lp_.find(lane_name(oc.j, oc.jp, oc.from, oc.to));
    const std::size_t z_bwd = lp_.find(lane_name(oc.jp, oc.j, oc.to, oc.from));
    for (const auto& zone : {oc.from, oc.to}) {
      lp_.equalities.push_back({ConstraintKind::LaneLink,
                                {{z_fwd, 1}, {zone_order(oc.j, oc.jp, zone), -1}},
                                0,
                                "dl_" + lp_.vars[z_fwd].name + "_" + zone});
      lp_.equalities.push_back({ConstraintKind::LaneLink,
                                {{z_bwd, 1}, {zone_order(oc.jp, oc.j, zone), -1}},
                                0,
                                "dl_" + lp_.vars[z_bwd].name + "_" + zone});
    }
  }
  for (const auto& oc : conf.opposing)
    lp_.equalities.push_back({ConstraintKind::LaneAntisymmetry,
                              {{lp_.find(lane_name(oc.j, oc.jp, oc.from, oc.to)), 1},
                               {lp_.find(lane_name(oc.jp, oc.j, oc.to, oc.from)), 1}},
                              1,
                              "dz_" + id(oc.j) + "_" + id(oc.jp) + "_" + oc.from + "_" + oc.to});

  // Order rows by kind; within a kind the loops above already emit in
  // (j, j', zone) order.
  auto by_kind = [](const LinearConstraint& x, const LinearConstraint& y) { return x.kind < y.kind; };
  std::stable_sort(lp_.inequalities.begin(), lp_.inequalities.end(), by_kind);
  std::stable_sort(lp_.equalities.begin(), lp_.equalities.end(), by_kind);

  for (std::size_t j = 0; j < n; ++j)
    lp_.objective.emplace_back(lp_.tout[j].back(), inst_.agvs[j].weight / Rational(inst_.d_max));
  return std::move(lp_);
}

}  // namespace detail

struct BuildOptions {
  /// Divides every big-M coefficient. Values other than 1 produce an invalid
  /// model; used by fault-injection tests only.
  std::int64_t big_m_divisor = 1;
};

inline LinearProgram build_ilp(const Instance& inst, const TimeWindows& win, const ConflictSets& conf,
                               const BuildOptions& opts = {}) {
  detail::IlpBuilder builder(inst, win);
  builder.big_m_divisor = opts.big_m_divisor;
  return builder.build(conf);
}

inline LinearProgram build_ilp(const Instance& inst) {
  return build_ilp(inst, compute_time_windows(inst), find_conflicts(inst));
}

// ---------------------------------------------------------------------------
// Sizes

struct SizeReport {
  std::size_t n_int = 0;
  std::size_t n_bin = 0;
  std::size_t n_eq = 0;
  std::size_t n_ineq = 0;
  std::size_t bound_vars = 0;
  std::size_t bound_eq = 0;
  std::size_t bound_ineq = 0;
  std::map<std::string, std::size_t> by_kind;

  std::size_t n_vars() const { return n_int + n_bin; }
  bool within_bounds() const {
    return n_vars() <= bound_vars && n_eq <= bound_eq && n_ineq <= bound_ineq;
  }
};

/// Analytic limits: |J|(|J|-1)|S|/2 + 2|J||S| variables, |J|^2|S|/2
/// (rounded up) no-overtake equalities and 3|J|^2|S| inequalities.
inline SizeReport analytic_bounds(std::size_t n_agvs, std::size_t n_zones) {
  SizeReport r;
  const std::size_t jj = n_agvs * n_agvs;
  r.bound_vars = n_agvs * (n_agvs - 1) * n_zones / 2 + 2 * n_agvs * n_zones;
  r.bound_eq = (jj * n_zones + 1) / 2;
  r.bound_ineq = 3 * jj * n_zones;
  return r;
}

inline SizeReport size_report(const Instance& inst, const LinearProgram& lp) {
  SizeReport r = analytic_bounds(inst.agvs.size(), inst.topology.zones.size());
  r.n_int = lp.n_integer();
  r.n_bin = lp.n_binary();
  r.n_eq = lp.equalities.size();
  r.n_ineq = lp.inequalities.size();
  for (auto k : kAllConstraintKinds) r.by_kind[kind_name(k)] = 0;
  for (const auto& c : lp.equalities) ++r.by_kind[kind_name(c.kind)];
  for (const auto& c : lp.inequalities) ++r.by_kind[kind_name(c.kind)];
  return r;
}

inline SizeReport size_bounds(const Instance& inst) { return size_report(inst, build_ilp(inst)); }

// ---------------------------------------------------------------------------
// Evaluation

struct ConstraintViolation {
  bool equality = false;
  std::size_t row = 0;
  ConstraintKind kind = ConstraintKind::PassTime;
  std::string label;
  std::int64_t residual = 0;  // lhs - rhs
};

/// Lists every violated row; empty iff the assignment is feasible.
inline std::vector<ConstraintViolation> eval_assignment(const LinearProgram& lp,
                                                        std::span<const std::int64_t> values) {
  if (values.size() != lp.vars.size())
    throw std::invalid_argument("assignment covers " + std::to_string(values.size()) + " of " +
                                std::to_string(lp.vars.size()) + " variables");
  for (std::size_t v = 0; v < values.size(); ++v)
    if (values[v] < lp.vars[v].lo || values[v] > lp.vars[v].hi)
      throw std::invalid_argument("value " + std::to_string(values[v]) + " out of bounds for " + lp.vars[v].name);
  std::vector<ConstraintViolation> out;
  auto lhs = [&](const LinearConstraint& c) {
    std::int64_t s = 0;
    for (const auto& t : c.terms) s += t.coeff * values[t.var];
    return s;
  };
  for (std::size_t i = 0; i < lp.equalities.size(); ++i) {
    const auto& c = lp.equalities[i];
    const std::int64_t r = lhs(c) - c.rhs;
    if (r != 0) out.push_back({true, i, c.kind, c.label, r});
  }
  for (std::size_t i = 0; i < lp.inequalities.size(); ++i) {
    const auto& c = lp.inequalities[i];
    const std::int64_t r = lhs(c) - c.rhs;
    if (r < 0) out.push_back({false, i, c.kind, c.label, r});
  }
  return out;
}

inline std::vector<ConstraintViolation> eval_assignment(const LinearProgram& lp,
                                                        const std::map<std::string, std::int64_t>& named) {
  std::vector<std::int64_t> values(lp.vars.size());
  for (std::size_t v = 0; v < lp.vars.size(); ++v) {
    const auto it = named.find(lp.vars[v].name);
    if (it == named.end()) throw std::invalid_argument("assignment misses variable " + lp.vars[v].name);
    values[v] = it->second;
  }
  return eval_assignment(lp, values);
}

// ---------------------------------------------------------------------------
// LP-format export

namespace detail {

inline void write_row(std::ostream& os, const LinearProgram& lp, const LinearConstraint& c) {
  bool first = true;
  for (const auto& t : c.terms) {
    if (t.coeff == 0) continue;
    const std::int64_t mag = t.coeff < 0 ? -t.coeff : t.coeff;
    os << (t.coeff < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    if (mag != 1) os << mag << ' ';
    os << lp.vars[t.var].name;
    first = false;
  }
  if (first) os << "0 " << lp.vars.front().name;
}

}  // namespace detail

/// CPLEX LP-style text: Minimize / Subject To / Bounds / Binaries / Generals.
inline std::string to_lp_text(const LinearProgram& lp) {
  std::ostringstream os;
  os.precision(17);
  os << "\\ AGV scheduling ILP: " << lp.vars.size() << " variables, " << lp.equalities.size()
     << " equalities, " << lp.inequalities.size() << " inequalities\n";
  os << "Minimize\n obj:";
  bool first = true;
  for (const auto& [v, c] : lp.objective) {
    os << (first ? " " : " + ") << to_double(c) << ' ' << lp.vars[v].name;
    first = false;
  }
  os << "\nSubject To\n";
  for (const auto& c : lp.equalities) {
    os << ' ' << c.label << ": ";
    detail::write_row(os, lp, c);
    os << " = " << c.rhs << '\n';
  }
  for (const auto& c : lp.inequalities) {
    os << ' ' << c.label << ": ";
    detail::write_row(os, lp, c);
    os << " >= " << c.rhs << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : lp.vars)
    if (!v.is_binary()) os << ' ' << v.lo << " <= " << v.name << " <= " << v.hi << '\n';
  os << "Binaries\n";
  for (const auto& v : lp.vars)
    if (v.is_binary()) os << ' ' << v.name << '\n';
  os << "Generals\n";
  for (const auto& v : lp.vars)
    if (!v.is_binary()) os << ' ' << v.name << '\n';
  os << "End\n";
  return os.str();
}

}  // namespace agv
