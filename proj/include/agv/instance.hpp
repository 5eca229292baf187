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
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agv/rational.hpp"

namespace agv {

using ZoneId = std::string;
using AgvId = std::string;

/// Raised for malformed, schema-violating or inconsistent instances.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Connection between two zones. `bidirectional` marks a single lane shared by
/// both travel directions (head-on traffic can deadlock); otherwise the zones
/// are joined by a pair of one-way lanes and opposing traffic never meets.
struct Lane {
  ZoneId a;
  ZoneId b;
  bool bidirectional = false;

  bool joins(const ZoneId& x, const ZoneId& y) const {
    return (a == x && b == y) || (a == y && b == x);
  }
  friend bool operator==(const Lane&, const Lane&) = default;
};

struct Topology {
  std::vector<ZoneId> zones;
  std::vector<Lane> lanes;

  bool has_zone(const ZoneId& z) const {
    return std::find(zones.begin(), zones.end(), z) != zones.end();
  }
  const Lane* find_lane(const ZoneId& x, const ZoneId& y) const {
    for (const auto& l : lanes)
      if (l.joins(x, y)) return &l;
    return nullptr;
  }
  std::size_t zone_index(const ZoneId& z) const {
    const auto it = std::find(zones.begin(), zones.end(), z);
    if (it == zones.end()) throw InstanceError("unknown zone '" + z + "'");
    return static_cast<std::size_t>(it - zones.begin());
  }
  friend bool operator==(const Topology&, const Topology&) = default;
};

struct AgvSpec {
  AgvId id;
  std::vector<ZoneId> path;
  Tick release = 0;
  Rational weight{1};
  std::map<std::pair<ZoneId, ZoneId>, Tick> pass_time;
  std::map<ZoneId, Tick> zone_time;

  std::size_t position(const ZoneId& z) const {
    const auto it = std::find(path.begin(), path.end(), z);
    return it == path.end() ? npos : static_cast<std::size_t>(it - path.begin());
  }
  bool visits(const ZoneId& z) const { return position(z) != npos; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  friend bool operator==(const AgvSpec&, const AgvSpec&) = default;
};

/// Headway between `leader` and `follower` on the lane from `from` to `to`.
struct HeadwayOverride {
  AgvId leader;
  AgvId follower;
  ZoneId from;
  ZoneId to;
  Tick ticks = 0;
  friend bool operator==(const HeadwayOverride&, const HeadwayOverride&) = default;
};

struct Instance {
  Topology topology;
  std::vector<AgvSpec> agvs;
  Tick d_max = 1;
  Tick headway_default = 0;
  std::vector<HeadwayOverride> headway_overrides;

  /// Minimal headway when `leader` precedes `follower` on from->to.
  Tick headway(const AgvId& leader, const AgvId& follower, const ZoneId& from,
               const ZoneId& to) const {
    for (const auto& o : headway_overrides)
      if (o.leader == leader && o.follower == follower && o.from == from && o.to == to)
        return o.ticks;
    return headway_default;
  }
  std::size_t agv_index(const AgvId& id) const {
    for (std::size_t j = 0; j < agvs.size(); ++j)
      if (agvs[j].id == id) return j;
    throw InstanceError("unknown AGV '" + id + "'");
  }
  std::size_t total_visits() const {
    std::size_t n = 0;
    for (const auto& a : agvs) n += a.path.size();
    return n;
  }
  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Throws InstanceError naming the offending field, zone or AGV.
inline void validate_instance(const Instance& inst) {
  const auto& topo = inst.topology;
  if (topo.zones.empty()) throw InstanceError("zones: at least one zone required");
  std::set<ZoneId> zones;
  for (const auto& z : topo.zones) {
    if (z.empty()) throw InstanceError("zones: empty zone identifier");
    if (!zones.insert(z).second) throw InstanceError("zones: duplicate zone '" + z + "'");
  }
  std::set<std::pair<ZoneId, ZoneId>> lane_keys;
  for (const auto& l : topo.lanes) {
    if (!zones.count(l.a)) throw InstanceError("lanes: unknown zone '" + l.a + "'");
    if (!zones.count(l.b)) throw InstanceError("lanes: unknown zone '" + l.b + "'");
    if (l.a == l.b) throw InstanceError("lanes: self-loop at zone '" + l.a + "'");
    const auto key = std::minmax(l.a, l.b);
    if (!lane_keys.insert({key.first, key.second}).second)
      throw InstanceError("lanes: duplicate lane " + l.a + "-" + l.b);
  }
  if (inst.d_max < 1) throw InstanceError("d_max: must be >= 1");
  if (inst.headway_default < 0) throw InstanceError("headway_default: must be >= 0");
  if (inst.agvs.empty()) throw InstanceError("agvs: at least one AGV required");

  std::set<AgvId> ids;
  for (const auto& a : inst.agvs) {
    if (a.id.empty()) throw InstanceError("agvs: empty AGV identifier");
    if (!ids.insert(a.id).second) throw InstanceError("agvs: duplicate AGV '" + a.id + "'");
    const std::string who = "agv '" + a.id + "': ";
    if (a.path.empty()) throw InstanceError(who + "empty path");
    if (a.release < 0) throw InstanceError(who + "negative release");
    if (a.weight < Rational(0)) throw InstanceError(who + "negative weight");
    std::set<ZoneId> seen;
    for (const auto& z : a.path) {
      if (!zones.count(z)) throw InstanceError(who + "path uses unknown zone '" + z + "'");
      if (!seen.insert(z).second) throw InstanceError(who + "path revisits zone '" + z + "'");
      const auto zt = a.zone_time.find(z);
      if (zt == a.zone_time.end()) throw InstanceError(who + "zone_time missing for '" + z + "'");
      if (zt->second < 0) throw InstanceError(who + "negative zone_time at '" + z + "'");
    }
    for (const auto& [z, t] : a.zone_time)
      if (!seen.count(z)) throw InstanceError(who + "zone_time for zone '" + z + "' not on path");
    for (std::size_t k = 0; k + 1 < a.path.size(); ++k) {
      const auto& s = a.path[k];
      const auto& sp = a.path[k + 1];
      if (!topo.find_lane(s, sp))
        throw InstanceError(who + "no lane between '" + s + "' and '" + sp + "'");
      const auto pt = a.pass_time.find({s, sp});
      if (pt == a.pass_time.end())
        throw InstanceError(who + "pass_time missing for '" + s + "," + sp + "'");
      if (pt->second < 0) throw InstanceError(who + "negative pass_time '" + s + "," + sp + "'");
    }
    if (a.pass_time.size() + 1 != a.path.size())
      throw InstanceError(who + "pass_time has entries for non-consecutive zones");
  }
  for (const auto& o : inst.headway_overrides) {
    if (!ids.count(o.leader)) throw InstanceError("headway_overrides: unknown AGV '" + o.leader + "'");
    if (!ids.count(o.follower))
      throw InstanceError("headway_overrides: unknown AGV '" + o.follower + "'");
    if (o.leader == o.follower) throw InstanceError("headway_overrides: leader equals follower");
    if (!zones.count(o.from)) throw InstanceError("headway_overrides: unknown zone '" + o.from + "'");
    if (!zones.count(o.to)) throw InstanceError("headway_overrides: unknown zone '" + o.to + "'");
    if (o.ticks < 0) throw InstanceError("headway_overrides: negative ticks");
  }
}

/// Sorts zones, lanes (endpoints ordered), AGVs and overrides by identifier.
inline Instance canonicalize(Instance inst) {
  auto& topo = inst.topology;
  std::sort(topo.zones.begin(), topo.zones.end());
  for (auto& l : topo.lanes)
    if (l.b < l.a) std::swap(l.a, l.b);
  std::sort(topo.lanes.begin(), topo.lanes.end(),
            [](const Lane& x, const Lane& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  std::sort(inst.agvs.begin(), inst.agvs.end(),
            [](const AgvSpec& x, const AgvSpec& y) { return x.id < y.id; });
  std::sort(inst.headway_overrides.begin(), inst.headway_overrides.end(),
            [](const HeadwayOverride& x, const HeadwayOverride& y) {
              return std::tie(x.leader, x.follower, x.from, x.to) <
                     std::tie(y.leader, y.follower, y.from, y.to);
            });
  return inst;
}

// ---------------------------------------------------------------------------
// JSON document

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw InstanceError(where + ": missing field '" + key + "'");
  return *it;
}

inline std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw InstanceError(where + ": expected string");
  return v.get<std::string>();
}

inline Tick get_tick(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw InstanceError(where + ": expected integer");
  return v.get<Tick>();
}

inline Rational get_weight(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return rational_from_double(v.get<double>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw InstanceError(where + ": " + e.what());
  }
  throw InstanceError(where + ": expected number");
}

inline json weight_to_json(const Rational& w) {
  if (w.denominator() == 1) return w.numerator();
  return to_string(w);
}

inline std::pair<ZoneId, ZoneId> split_pair_key(const std::string& key, const std::string& where) {
  const auto comma = key.find(',');
  if (comma == std::string::npos || key.find(',', comma + 1) != std::string::npos)
    throw InstanceError(where + ": key '" + key + "' is not of the form \"s,s'\"");
  return {key.substr(0, comma), key.substr(comma + 1)};
}

}  // namespace detail

inline nlohmann::json instance_to_json(const Instance& unsorted) {
  using nlohmann::json;
  const Instance inst = canonicalize(unsorted);
  json doc = json::object();
  doc["zones"] = inst.topology.zones;
  json lanes = json::array();
  for (const auto& l : inst.topology.lanes)
    lanes.push_back({{"a", l.a}, {"b", l.b}, {"bidirectional", l.bidirectional}});
  doc["lanes"] = lanes;
  doc["d_max"] = inst.d_max;
  doc["headway_default"] = inst.headway_default;
  json overrides = json::array();
  for (const auto& o : inst.headway_overrides)
    overrides.push_back(
        {{"leader", o.leader}, {"follower", o.follower}, {"from", o.from}, {"to", o.to}, {"ticks", o.ticks}});
  doc["headway_overrides"] = overrides;
  json agvs = json::array();
  for (const auto& a : inst.agvs) {
    json pass = json::object();
    for (const auto& [key, t] : a.pass_time) pass[key.first + "," + key.second] = t;
    json zt = json::object();
    for (const auto& [z, t] : a.zone_time) zt[z] = t;
    agvs.push_back({{"id", a.id},
                    {"path", a.path},
                    {"release", a.release},
                    {"weight", detail::weight_to_json(a.weight)},
                    {"pass_time", pass},
                    {"zone_time", zt}});
  }
  doc["agvs"] = agvs;
  return doc;
}

/// Canonical serialization: sorted keys, arrays sorted by identifier, two-space indent.
inline std::string save_instance(const Instance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

inline Instance instance_from_json(const nlohmann::json& doc) {
  using detail::get_string;
  using detail::get_tick;
  using detail::require;
  if (!doc.is_object()) throw InstanceError("document: expected a JSON object");
  Instance inst;

  const auto& zones = require(doc, "zones", "document");
  if (!zones.is_array()) throw InstanceError("zones: expected array");
  for (const auto& z : zones) inst.topology.zones.push_back(get_string(z, "zones"));

  const auto& lanes = require(doc, "lanes", "document");
  if (!lanes.is_array()) throw InstanceError("lanes: expected array");
  for (const auto& l : lanes) {
    if (!l.is_object()) throw InstanceError("lanes: expected object");
    Lane lane;
    lane.a = get_string(require(l, "a", "lanes"), "lanes.a");
    lane.b = get_string(require(l, "b", "lanes"), "lanes.b");
    const auto& bi = require(l, "bidirectional", "lanes");
    if (!bi.is_boolean()) throw InstanceError("lanes.bidirectional: expected boolean");
    lane.bidirectional = bi.get<bool>();
    inst.topology.lanes.push_back(lane);
  }

  inst.d_max = get_tick(require(doc, "d_max", "document"), "d_max");
  inst.headway_default = get_tick(require(doc, "headway_default", "document"), "headway_default");

  if (const auto it = doc.find("headway_overrides"); it != doc.end()) {
    if (!it->is_array()) throw InstanceError("headway_overrides: expected array");
    for (const auto& o : *it) {
      const std::string w = "headway_overrides";
      HeadwayOverride h;
      h.leader = get_string(require(o, "leader", w), w + ".leader");
      h.follower = get_string(require(o, "follower", w), w + ".follower");
      h.from = get_string(require(o, "from", w), w + ".from");
      h.to = get_string(require(o, "to", w), w + ".to");
      h.ticks = get_tick(require(o, "ticks", w), w + ".ticks");
      inst.headway_overrides.push_back(h);
    }
  }

  const auto& agvs = require(doc, "agvs", "document");
  if (!agvs.is_array()) throw InstanceError("agvs: expected array");
  for (const auto& a : agvs) {
    if (!a.is_object()) throw InstanceError("agvs: expected object");
    AgvSpec spec;
    spec.id = get_string(require(a, "id", "agvs"), "agvs.id");
    const std::string w = "agv '" + spec.id + "'";
    const auto& path = require(a, "path", w);
    if (!path.is_array()) throw InstanceError(w + ": path must be an array");
    for (const auto& z : path) spec.path.push_back(get_string(z, w + ".path"));
    spec.release = get_tick(require(a, "release", w), w + ".release");
    spec.weight = detail::get_weight(require(a, "weight", w), w + ".weight");
    const auto& pass = require(a, "pass_time", w);
    if (!pass.is_object()) throw InstanceError(w + ".pass_time: expected object");
    for (const auto& [key, v] : pass.items())
      spec.pass_time[detail::split_pair_key(key, w + ".pass_time")] = get_tick(v, w + ".pass_time");
    const auto& zt = require(a, "zone_time", w);
    if (!zt.is_object()) throw InstanceError(w + ".zone_time: expected object");
    for (const auto& [key, v] : zt.items()) spec.zone_time[key] = get_tick(v, w + ".zone_time");
    inst.agvs.push_back(std::move(spec));
  }
  validate_instance(inst);
  return inst;
}

/// Parses and validates a serialized instance document.
inline Instance load_instance(const std::string& bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceError(std::string("parse error: ") + e.what());
  }
  return instance_from_json(doc);
}

// ---------------------------------------------------------------------------
// Built-in and generated instances

/// The 7-AGV / 7-zone factory instance (corridor s0..s6, d_max = 40).
inline Instance factory_instance() {
  Instance inst;
  for (int i = 0; i <= 6; ++i) inst.topology.zones.push_back("s" + std::to_string(i));
  // s0..s5 are double one-way lanes; s5-s6 is the single shared lane.
  for (int i = 0; i < 6; ++i)
    inst.topology.lanes.push_back({"s" + std::to_string(i), "s" + std::to_string(i + 1), i == 5});
  inst.d_max = 40;
  inst.headway_default = 2;

  const std::map<std::pair<ZoneId, ZoneId>, Tick> lane_pass = {
      {{"s0", "s1"}, 6}, {{"s1", "s2"}, 6}, {{"s2", "s3"}, 0},
      {{"s3", "s4"}, 6}, {{"s4", "s5"}, 4}, {{"s5", "s6"}, 4}};
  auto pass_of = [&](const ZoneId& x, const ZoneId& y) {
    const auto it = lane_pass.find(std::minmax(x, y));
    return it->second;
  };
  struct Row {
    std::vector<ZoneId> path;
    Tick release;
  };
  const std::vector<Row> rows = {
      {{"s0", "s1", "s2", "s3"}, 0}, {{"s0", "s1", "s2"}, 0},       {{"s4", "s3", "s2", "s1"}, 8},
      {{"s4", "s3", "s2", "s1", "s0"}, 9}, {{"s2", "s3"}, 15},     {{"s6", "s5", "s4", "s3"}, 0},
      {{"s5", "s6"}, 0}};
  for (std::size_t j = 0; j < rows.size(); ++j) {
    AgvSpec a;
    a.id = "agv" + std::to_string(j);
    a.path = rows[j].path;
    a.release = rows[j].release;
    a.weight = Rational(1);
    for (std::size_t k = 0; k < a.path.size(); ++k) {
      a.zone_time[a.path[k]] = 2;
      if (k + 1 < a.path.size()) a.pass_time[{a.path[k], a.path[k + 1]}] = pass_of(a.path[k], a.path[k + 1]);
    }
    inst.agvs.push_back(std::move(a));
  }
  return inst;
}

}  // namespace agv
