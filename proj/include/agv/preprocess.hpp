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

#include <cstddef>
#include <vector>

#include "agv/instance.hpp"

namespace agv {

/// Conflict-free earliest entering/leaving times. Entries are indexed by AGV
/// index and path position; upper limits are lower + d_max.
struct TimeWindows {
  std::vector<std::vector<Tick>> in_lo;
  std::vector<std::vector<Tick>> out_lo;
  Tick d_max = 0;

  Tick in_hi(std::size_t j, std::size_t k) const { return in_lo[j][k] + d_max; }
  Tick out_hi(std::size_t j, std::size_t k) const { return out_lo[j][k] + d_max; }
};

/// Forward propagation of release, zone stay and passing times along each path.
inline TimeWindows compute_time_windows(const Instance& inst) {
  TimeWindows win;
  win.d_max = inst.d_max;
  win.in_lo.resize(inst.agvs.size());
  win.out_lo.resize(inst.agvs.size());
  for (std::size_t j = 0; j < inst.agvs.size(); ++j) {
    const auto& a = inst.agvs[j];
    Tick t = a.release;
    for (std::size_t k = 0; k < a.path.size(); ++k) {
      win.in_lo[j].push_back(t);
      t += a.zone_time.at(a.path[k]);
      win.out_lo[j].push_back(t);
      if (k + 1 < a.path.size()) t += a.pass_time.at({a.path[k], a.path[k + 1]});
    }
  }
  return win;
}

/// Pair of AGVs traversing a maximal common run of zones in the same order.
struct SameDirectionRun {
  std::size_t j = 0;
  std::size_t jp = 0;
  std::vector<ZoneId> zones;
  friend bool operator==(const SameDirectionRun&, const SameDirectionRun&) = default;
};

/// `j` goes from -> to and `jp` goes to -> from over one single shared lane.
struct OpposingCrossing {
  std::size_t j = 0;
  std::size_t jp = 0;
  ZoneId from;
  ZoneId to;
  friend bool operator==(const OpposingCrossing&, const OpposingCrossing&) = default;
};

struct SharedZone {
  std::size_t j = 0;
  std::size_t jp = 0;
  ZoneId zone;
  friend bool operator==(const SharedZone&, const SharedZone&) = default;
};

/// Conflict candidates; every entry has j < jp.
struct ConflictSets {
  std::vector<SameDirectionRun> same_dir;
  std::vector<OpposingCrossing> opposing;
  std::vector<SharedZone> zone_pairs;
};

inline ConflictSets find_conflicts(const Instance& inst) {
  ConflictSets out;
  const auto& topo = inst.topology;
  const std::size_t n = inst.agvs.size();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t jp = j + 1; jp < n; ++jp) {
      const auto& a = inst.agvs[j];
      const auto& b = inst.agvs[jp];
      std::vector<ZoneId> shared;
      for (const auto& z : topo.zones)
        if (a.visits(z) && b.visits(z)) shared.push_back(z);
      for (const auto& z : shared) out.zone_pairs.push_back({j, jp, z});

      // Maximal chains of directed edges present in both paths.
      std::vector<ZoneId> run;
      auto flush = [&] {
        if (run.size() >= 2) out.same_dir.push_back({j, jp, run});
        run.clear();
      };
      for (std::size_t k = 0; k + 1 < a.path.size(); ++k) {
        const auto& s = a.path[k];
        const auto& sp = a.path[k + 1];
        const std::size_t pb = b.position(s);
        const bool common = pb != AgvSpec::npos && pb + 1 < b.path.size() && b.path[pb + 1] == sp;
        if (common) {
          if (run.empty()) run.push_back(s);
          run.push_back(sp);
        } else {
          flush();
        }
      }
      flush();

      for (std::size_t k = 0; k + 1 < a.path.size(); ++k) {
        const auto& s = a.path[k];
        const auto& sp = a.path[k + 1];
        const Lane* lane = topo.find_lane(s, sp);
        if (!lane || !lane->bidirectional) continue;
        const std::size_t pb = b.position(sp);
        if (pb != AgvSpec::npos && pb + 1 < b.path.size() && b.path[pb + 1] == s)
          out.opposing.push_back({j, jp, s, sp});
      }
    }
  }
  return out;
}

}  // namespace agv
