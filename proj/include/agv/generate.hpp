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
#include <random>
#include <string>
#include <vector>

#include "agv/ilp.hpp"
#include "agv/instance.hpp"

namespace agv {

namespace detail {

inline std::string padded(const std::string& prefix, std::size_t i, std::size_t count) {
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  std::string digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace detail

/// Linear-corridor instance with mixed single/double lanes and AGVs heading
/// both ways. Pure in its arguments. AGV sets whose model would exceed the
/// analytic size limits are redrawn from the same stream.
inline Instance generate_instance(std::size_t n_agvs, std::size_t n_zones, Tick d_max,
                                  std::uint64_t seed) {
  if (n_agvs < 1) throw InstanceError("generate_instance: n_agvs must be >= 1");
  if (n_zones < 2) throw InstanceError("generate_instance: n_zones must be >= 2");
  if (d_max < 1) throw InstanceError("generate_instance: d_max must be >= 1");

  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + n_agvs * 1000003ULL + n_zones * 7919ULL +
                      static_cast<std::uint64_t>(d_max));
  auto uniform = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };

  constexpr int kMaxAttempts = 1000;
  Instance inst;
  inst.d_max = d_max;
  inst.headway_default = 2;
  for (std::size_t i = 0; i < n_zones; ++i) inst.topology.zones.push_back(detail::padded("s", i, n_zones));
  std::vector<Tick> lane_pass(n_zones - 1);
  static constexpr Tick kPassChoices[] = {0, 2, 4, 6};
  for (std::size_t i = 0; i + 1 < n_zones; ++i) {
    const bool single = uniform(0, 3) == 0;
    inst.topology.lanes.push_back({inst.topology.zones[i], inst.topology.zones[i + 1], single});
    lane_pass[i] = kPassChoices[uniform(0, 3)];
  }

  // Path lengths stay near |S|/sqrt(2) so the pair/zone overlap mirrors the
  // factory instances.
  const std::int64_t max_len =
      std::max<std::int64_t>(2, static_cast<std::int64_t>(static_cast<double>(n_zones) * 0.6));
  const std::int64_t release_span = 3 * static_cast<std::int64_t>(n_agvs);
  auto draw_agvs = [&] {
    std::vector<AgvSpec> agvs;
    for (std::size_t j = 0; j < n_agvs; ++j) {
      const std::int64_t len = uniform(std::min<std::int64_t>(2, max_len), max_len);
      const std::int64_t start = uniform(0, static_cast<std::int64_t>(n_zones) - len);
      const bool forward = uniform(0, 1) == 1;
      AgvSpec a;
      a.id = detail::padded("agv", j, n_agvs);
      for (std::int64_t k = 0; k < len; ++k) {
        const std::size_t zi = static_cast<std::size_t>(forward ? start + k : start + len - 1 - k);
        a.path.push_back(inst.topology.zones[zi]);
      }
      a.release = uniform(0, release_span);
      a.weight = Rational(1);
      for (std::size_t k = 0; k < a.path.size(); ++k) {
        a.zone_time[a.path[k]] = 2;
        if (k + 1 < a.path.size()) {
          const std::size_t lo = std::min(inst.topology.zone_index(a.path[k]),
                                          inst.topology.zone_index(a.path[k + 1]));
          a.pass_time[{a.path[k], a.path[k + 1]}] = lane_pass[lo];
        }
      }
      agvs.push_back(std::move(a));
    }
    return agvs;
  };

  // Best effort: tiny corridors with many AGVs cannot meet the limits.
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    inst.agvs = draw_agvs();
    if (size_bounds(inst).within_bounds()) break;
  }
  validate_instance(inst);
  return inst;
}

}  // namespace agv
