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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agv/ilp.hpp"
#include "agv/instance.hpp"
#include "agv/preprocess.hpp"
#include "agv/rational.hpp"
#include "agv/verify.hpp"

namespace agv {

/// Per LP variable: -1 unassigned, 0 or 1 for order variables. Entries of
/// time variables are ignored.
struct OrderAssignment {
  std::vector<std::int8_t> values;
};

/// Order variables tied together by the equality rows (b = b' or b + b' = 1)
/// collapse into groups; each variable equals its group value xor parity.
struct OrderGroups {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> group_of;  // per LP var, npos for time variables
  std::vector<std::uint8_t> parity;   // per LP var
  std::vector<std::size_t> representative;  // per group, the LP var defining the group value
  bool consistent = true;  // false if the equalities contradict each other

  std::size_t size() const { return representative.size(); }
};

inline OrderGroups order_groups(const LinearProgram& lp) {
  const std::size_t n = lp.vars.size();
  std::vector<std::size_t> parent(n);
  std::vector<std::uint8_t> to_parent(n, 0);  // parity relative to parent
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    std::uint8_t par = 0;
    std::size_t r = v;
    while (parent[r] != r) {
      par ^= to_parent[r];
      r = parent[r];
    }
    // Path compression with parity bookkeeping.
    std::uint8_t acc = par;
    while (parent[v] != v) {
      const std::size_t next = parent[v];
      const std::uint8_t step = to_parent[v];
      parent[v] = r;
      to_parent[v] = acc;
      acc ^= step;
      v = next;
    }
    return std::pair{r, par};
  };
  OrderGroups g;
  for (const auto& c : lp.equalities) {
    const bool pair_row = c.terms.size() == 2 && lp.vars[c.terms[0].var].is_binary() &&
                          lp.vars[c.terms[1].var].is_binary();
    std::uint8_t rel = 0;
    if (pair_row && c.terms[0].coeff == 1 && c.terms[1].coeff == 1 && c.rhs == 1) rel = 1;
    else if (pair_row && c.terms[0].coeff == -c.terms[1].coeff && std::abs(c.terms[0].coeff) == 1 && c.rhs == 0) rel = 0;
    else throw std::logic_error("unsupported equality row '" + c.label + "'");
    const auto [ra, pa] = find(c.terms[0].var);
    const auto [rb, pb] = find(c.terms[1].var);
    if (ra == rb) {
      if ((pa ^ pb) != rel) g.consistent = false;
      continue;
    }
    const std::size_t hi = std::max(ra, rb), lo = std::min(ra, rb);
    parent[hi] = lo;
    to_parent[hi] = pa ^ pb ^ rel;
  }
  g.group_of.assign(n, OrderGroups::npos);
  g.parity.assign(n, 0);
  std::vector<std::size_t> group_of_root(n, OrderGroups::npos);
  for (std::size_t v = 0; v < n; ++v) {
    if (!lp.vars[v].is_binary()) continue;
    const auto [r, p] = find(v);
    if (group_of_root[r] == OrderGroups::npos) {
      group_of_root[r] = g.representative.size();
      g.representative.push_back(r);
    }
    g.group_of[v] = group_of_root[r];
    g.parity[v] = p;
  }
  return g;
}

namespace detail {

/// t_to >= t_from + weight(order), with weight0/weight1 for order = 0/1.
struct DiffEdge {
  std::size_t to = 0;
  std::size_t from = 0;
  std::int64_t weight0 = 0;
  std::int64_t weight1 = 0;
  std::size_t order = OrderGroups::npos;  // LP var, npos if unconditional
};

/// Every inequality must have the shape t_a - t_b + M * order >= c.
inline std::vector<DiffEdge> difference_edges(const LinearProgram& lp) {
  std::vector<DiffEdge> edges;
  for (const auto& c : lp.inequalities) {
    DiffEdge e;
    bool has_to = false, has_from = false;
    std::int64_t big_m = 0;
    for (const auto& t : c.terms) {
      if (lp.vars[t.var].is_binary()) {
        if (e.order != OrderGroups::npos) throw std::logic_error("row '" + c.label + "' has two order terms");
        e.order = t.var;
        big_m = t.coeff;
      } else if (t.coeff == 1 && !has_to) {
        e.to = t.var;
        has_to = true;
      } else if (t.coeff == -1 && !has_from) {
        e.from = t.var;
        has_from = true;
      } else {
        throw std::logic_error("row '" + c.label + "' is not a difference constraint");
      }
    }
    if (!has_to || !has_from) throw std::logic_error("row '" + c.label + "' is not a difference constraint");
    e.weight0 = c.rhs;
    e.weight1 = c.rhs - big_m;
    edges.push_back(e);
  }
  return edges;
}

struct Propagation {
  bool feasible = false;
  std::vector<Tick> times;  // per LP var; order entries unused
  std::string reason;
};

/// Least fixpoint of t_to >= t_from + w starting from `start`, within the
/// variable boxes. Group values of -1 take the more relaxed weight.
inline Propagation propagate(const LinearProgram& lp, const std::vector<DiffEdge>& edges, const OrderGroups& groups,
                             const std::vector<std::int8_t>& group_value, std::vector<Tick> start) {
  Propagation out;
  std::vector<std::pair<std::size_t, std::int64_t>> active;  // edge index, weight
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    std::int64_t w = e.weight0;
    if (e.order != OrderGroups::npos) {
      const std::int8_t gv = group_value[groups.group_of[e.order]];
      if (gv < 0) w = std::min(e.weight0, e.weight1);
      else w = ((gv ^ groups.parity[e.order]) != 0) ? e.weight1 : e.weight0;
    }
    // Rows that the boxes already satisfy never bind.
    if (w <= lp.vars[e.to].lo - lp.vars[e.from].hi) continue;
    active.emplace_back(i, w);
  }
  std::size_t n_time = 0;
  for (const auto& v : lp.vars) n_time += !v.is_binary();
  for (std::size_t round = 0; round <= n_time + 1; ++round) {
    bool changed = false;
    for (const auto& [i, w] : active) {
      const auto& e = edges[i];
      const Tick need = start[e.from] + w;
      if (need > start[e.to]) {
        if (need > lp.vars[e.to].hi) {
          out.reason = lp.vars[e.to].name + " exceeds its window (needs " + std::to_string(need) + " > " +
                       std::to_string(lp.vars[e.to].hi) + ")";
          return out;
        }
        start[e.to] = need;
        changed = true;
      }
    }
    if (!changed) {
      out.feasible = true;
      out.times = std::move(start);
      return out;
    }
  }
  out.reason = "positive cycle in the difference constraints";
  return out;
}

inline std::vector<Tick> lower_bounds(const LinearProgram& lp) {
  std::vector<Tick> t(lp.vars.size(), 0);
  for (std::size_t v = 0; v < lp.vars.size(); ++v) t[v] = lp.vars[v].lo;
  return t;
}

inline std::vector<std::int64_t> full_assignment(const LinearProgram& lp, const OrderGroups& groups,
                                                 const std::vector<std::int8_t>& group_value,
                                                 const std::vector<Tick>& times) {
  std::vector<std::int64_t> values(times.begin(), times.end());
  for (std::size_t v = 0; v < lp.vars.size(); ++v)
    if (lp.vars[v].is_binary()) values[v] = group_value[groups.group_of[v]] ^ groups.parity[v];
  return values;
}

}  // namespace detail

struct FixedOrderResult {
  bool feasible = false;
  std::vector<std::int64_t> values;  // complete LP assignment when feasible
  Rational objective{0};
  std::string reason;
};

/// Minimal times for a complete ordering; these minimise the (monotone)
/// objective among all schedules with that ordering.
inline FixedOrderResult fixed_order_times(const LinearProgram& lp, const OrderAssignment& ord) {
  if (ord.values.size() != lp.vars.size()) throw std::invalid_argument("order assignment size mismatch");
  const auto groups = order_groups(lp);
  FixedOrderResult res;
  std::vector<std::int8_t> gv(groups.size(), -1);
  for (std::size_t v = 0; v < lp.vars.size(); ++v) {
    if (!lp.vars[v].is_binary()) continue;
    if (ord.values[v] != 0 && ord.values[v] != 1)
      throw std::invalid_argument("order variable " + lp.vars[v].name + " is unassigned");
    const std::int8_t want = static_cast<std::int8_t>(ord.values[v] ^ groups.parity[v]);
    auto& slot = gv[groups.group_of[v]];
    if (slot >= 0 && slot != want) {
      res.reason = "linked order variables disagree at " + lp.vars[v].name;
      return res;
    }
    slot = want;
  }
  if (!groups.consistent) {
    res.reason = "order equalities contradict each other";
    return res;
  }
  const auto prop = detail::propagate(lp, detail::difference_edges(lp), groups, gv, detail::lower_bounds(lp));
  if (!prop.feasible) {
    res.reason = prop.reason;
    return res;
  }
  res.feasible = true;
  res.values = detail::full_assignment(lp, groups, gv, prop.times);
  res.objective = lp.objective_of(res.values);
  return res;
}

enum class BranchRule { Strong };

struct BnbConfig {
  double time_limit = 60.0;  // seconds
  std::uint64_t node_limit = 10'000'000;
  BranchRule branch_rule = BranchRule::Strong;
};

namespace detail {

class BranchAndBound {
 public:
  BranchAndBound(const LinearProgram& lp, const BnbConfig& cfg)
      : lp_(lp), cfg_(cfg), groups_(order_groups(lp)), edges_(difference_edges(lp)) {
    for (std::size_t g = 0; g < groups_.size(); ++g) names_.push_back(lp_.vars[groups_.representative[g]].name);
  }

  void greedy_incumbent(const Instance& inst) {
    const auto win = compute_time_windows(inst);
    std::vector<std::int8_t> gv(groups_.size(), 0);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const auto& ref = lp_.vars[groups_.representative[g]];
      const Tick a = win.in_lo[ref.j][inst.agvs[ref.j].position(ref.s)];
      const Tick b = win.in_lo[ref.jp][inst.agvs[ref.jp].position(ref.s)];
      const bool first = std::pair(a, ref.j) < std::pair(b, ref.jp);
      gv[g] = static_cast<std::int8_t>(first ? 1 : 0);  // representative keeps parity 0
    }
    offer(gv, propagate(lp_, edges_, groups_, gv, lower_bounds(lp_)));
  }

  void run() {
    start_ = std::chrono::steady_clock::now();
    if (!groups_.consistent) return;
    std::vector<std::int8_t> gv(groups_.size(), -1);
    auto root = propagate(lp_, edges_, groups_, gv, lower_bounds(lp_));
    if (!root.feasible) return;
    search(gv, root.times);
  }

  bool has_incumbent() const { return best_.has_value(); }
  bool complete() const { return !limit_hit_; }
  std::uint64_t nodes() const { return nodes_; }
  std::size_t n_groups() const { return groups_.size(); }
  const std::vector<std::int64_t>& best_values() const { return *best_; }
  const Rational& best_objective() const { return best_obj_; }

 private:
  Rational objective(const std::vector<Tick>& t) const {
    Rational f(0);
    for (const auto& [v, c] : lp_.objective) f += c * Rational(t[v]);
    return f;
  }

  void offer(const std::vector<std::int8_t>& gv, const Propagation& p) {
    if (!p.feasible) return;
    const Rational f = objective(p.times);
    if (!best_ || f < best_obj_) {
      best_ = full_assignment(lp_, groups_, gv, p.times);
      best_obj_ = f;
    }
  }

  bool out_of_budget() {
    if (nodes_ >= cfg_.node_limit) return true;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return elapsed > cfg_.time_limit;
  }

  bool pruned(const Propagation& p) const { return !p.feasible || (best_ && objective(p.times) >= best_obj_); }

  void search(std::vector<std::int8_t>& gv, const std::vector<Tick>& times) {
    if (limit_hit_) return;
    if (out_of_budget()) {
      limit_hit_ = true;
      return;
    }
    ++nodes_;

    // Strong branching with forcing: a side whose bound is infeasible or
    // already dominated fixes the group to the other side.
    std::vector<std::int8_t> local = gv;
    std::vector<Tick> cur = times;
    while (true) {
      std::size_t best_group = OrderGroups::npos;
      Rational best_score(0);
      Propagation best_children[2];
      bool forced = false;
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (local[g] >= 0) continue;
        Propagation child[2];
        for (int side = 0; side < 2; ++side) {
          local[g] = static_cast<std::int8_t>(side);
          child[side] = propagate(lp_, edges_, groups_, local, cur);
        }
        local[g] = -1;
        const bool dead0 = pruned(child[0]), dead1 = pruned(child[1]);
        if (dead0 && dead1) return;
        if (dead0 || dead1) {
          const int keep = dead0 ? 1 : 0;
          local[g] = static_cast<std::int8_t>(keep);
          cur = std::move(child[keep].times);
          forced = true;
          break;
        }
        const Rational score = std::min(objective(child[0].times), objective(child[1].times));
        if (best_group == OrderGroups::npos || score > best_score ||
            (score == best_score && names_[g] < names_[best_group])) {
          best_group = g;
          best_score = score;
          best_children[0] = std::move(child[0]);
          best_children[1] = std::move(child[1]);
        }
      }
      if (forced) continue;
      if (best_group == OrderGroups::npos) {
        // Every group fixed: the propagated times are feasible.
        Propagation leaf{true, cur, {}};
        offer(local, leaf);
        return;
      }
      const Rational f0 = objective(best_children[0].times);
      const Rational f1 = objective(best_children[1].times);
      const int first = f1 < f0 ? 1 : 0;
      for (int side : {first, 1 - first}) {
        if (pruned(best_children[side])) continue;
        local[best_group] = static_cast<std::int8_t>(side);
        search(local, best_children[side].times);
        if (limit_hit_) return;
      }
      return;
    }
  }

  const LinearProgram& lp_;
  BnbConfig cfg_;
  OrderGroups groups_;
  std::vector<DiffEdge> edges_;
  std::vector<std::string> names_;
  std::optional<std::vector<std::int64_t>> best_;
  Rational best_obj_{0};
  std::uint64_t nodes_ = 0;
  bool limit_hit_ = false;
  std::chrono::steady_clock::time_point start_;
};

inline SolveReport make_exact_report(const Instance& inst, const LinearProgram& lp, const std::string& solver,
                                     const std::optional<std::vector<std::int64_t>>& values, bool complete,
                                     double wall) {
  SolveReport rep;
  rep.solver = solver;
  rep.wall_time = wall;
  if (values) {
    rep.best = schedule_from_assignment(lp, *values);
    rep.pool.push_back({*rep.best, lp.objective_of(*values)});
    rep.status = SolveStatus::Feasible;
    rep.certified = complete;
  } else {
    rep.status = complete ? SolveStatus::Infeasible : SolveStatus::LimitNoIncumbent;
  }
  finalize_report(inst, rep);
  if (!values && !complete) rep.status = SolveStatus::LimitNoIncumbent;
  return rep;
}

}  // namespace detail

/// Depth-first branch-and-bound over order groups. The report is certified
/// when the search finished within its limits.
inline SolveReport solve_bnb(const Instance& inst, const LinearProgram& lp, const BnbConfig& cfg = {}) {
  if (cfg.time_limit <= 0 || cfg.node_limit == 0) throw std::invalid_argument("bnb limits must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  detail::BranchAndBound bb(lp, cfg);
  bb.greedy_incumbent(inst);
  bb.run();
  std::optional<std::vector<std::int64_t>> best;
  if (bb.has_incumbent()) best = bb.best_values();
  auto rep = detail::make_exact_report(inst, lp, "bnb", best, bb.complete(),
                                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  rep.details = {{"nodes", bb.nodes()}, {"order_groups", bb.n_groups()}};
  return rep;
}

inline constexpr std::size_t kOracleMaxGroups = 20;

/// Enumerates every ordering of the free order groups.
inline SolveReport brute_force_oracle(const Instance& inst, const LinearProgram& lp) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto groups = order_groups(lp);
  if (groups.size() > kOracleMaxGroups)
    throw std::invalid_argument("oracle: " + std::to_string(groups.size()) + " free order variables exceed " +
                                std::to_string(kOracleMaxGroups));
  const auto edges = detail::difference_edges(lp);
  const auto lo = detail::lower_bounds(lp);
  std::optional<std::vector<std::int64_t>> best;
  Rational best_obj(0);
  if (groups.consistent) {
    std::vector<std::int8_t> gv(groups.size(), 0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << groups.size()); ++mask) {
      for (std::size_t g = 0; g < groups.size(); ++g) gv[g] = static_cast<std::int8_t>((mask >> g) & 1);
      const auto p = detail::propagate(lp, edges, groups, gv, lo);
      if (!p.feasible) continue;
      const auto values = detail::full_assignment(lp, groups, gv, p.times);
      const Rational f = lp.objective_of(values);
      if (!best || f < best_obj) {
        best = values;
        best_obj = f;
      }
    }
  }
  auto rep = detail::make_exact_report(inst, lp, "oracle", best, true,
                                       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  rep.details = {{"order_groups", groups.size()}};
  return rep;
}

}  // namespace agv
