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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace agv {
namespace {

using testing::make_agv;

std::string read_data(const std::string& name) {
  std::ifstream in(std::string(AGV_DATA_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Instance, FactoryIsValid) {
  const auto inst = factory_instance();
  EXPECT_NO_THROW(validate_instance(inst));
  EXPECT_EQ(inst.agvs.size(), 7u);
  EXPECT_EQ(inst.topology.zones.size(), 7u);
  EXPECT_EQ(inst.d_max, 40);
  EXPECT_EQ(inst.total_visits(), 24u);
  std::size_t single = 0;
  for (const auto& l : inst.topology.lanes) single += l.bidirectional;
  EXPECT_EQ(single, 1u);
  ASSERT_NE(inst.topology.find_lane("s6", "s5"), nullptr);
  EXPECT_TRUE(inst.topology.find_lane("s6", "s5")->bidirectional);
}

TEST(Instance, JsonRoundTripIsCanonical) {
  const auto inst = factory_instance();
  const auto text = save_instance(inst);
  const auto back = load_instance(text);
  EXPECT_EQ(back, canonicalize(inst));
  EXPECT_EQ(save_instance(back), text);
}

TEST(Instance, ShippedFactoryFileMatchesBuiltin) {
  EXPECT_EQ(load_instance(read_data("factory.json")), canonicalize(factory_instance()));
  EXPECT_EQ(load_instance(read_data("crossing_toy.json")), canonicalize(testing::crossing_toy()));
}

TEST(Instance, FractionalWeightsSurviveSerialization) {
  auto inst = testing::shared_zone_toy(Rational(1, 3));
  const auto back = load_instance(save_instance(inst));
  EXPECT_EQ(back.agvs[1].weight, Rational(1, 3));
  auto doc = instance_to_json(inst);
  doc["agvs"][1]["weight"] = 0.25;
  EXPECT_EQ(instance_from_json(doc).agvs[1].weight, Rational(1, 4));
}

TEST(Instance, RejectsZeroAgvs) {
  auto inst = testing::single_agv();
  inst.agvs.clear();
  EXPECT_THROW(validate_instance(inst), InstanceError);
}

TEST(Instance, RejectsUnknownZoneOnPath) {
  auto inst = testing::single_agv();
  inst.agvs[0].path.push_back("s9");
  EXPECT_THROW(validate_instance(inst), InstanceError);
}

TEST(Instance, RejectsRevisit) {
  Instance inst;
  inst.topology = testing::corridor(3);
  inst.agvs.push_back(make_agv("a", {"s0", "s1", "s0"}, 0, 1, 1));
  EXPECT_THROW(validate_instance(inst), InstanceError);
}

TEST(Instance, RejectsMissingLaneAndPassTime) {
  Instance inst;
  inst.topology = testing::corridor(3);
  inst.agvs.push_back(make_agv("a", {"s0", "s2"}, 0, 1, 1));
  EXPECT_THROW(validate_instance(inst), InstanceError);

  auto ok = testing::single_agv();
  ok.agvs[0].pass_time.erase({"s0", "s1"});
  EXPECT_THROW(validate_instance(ok), InstanceError);
}

TEST(Instance, RejectsNegativeTimesAndDuplicates) {
  auto inst = testing::single_agv();
  inst.agvs[0].release = -1;
  EXPECT_THROW(validate_instance(inst), InstanceError);

  inst = testing::shared_zone_toy();
  inst.agvs[1].id = "a";
  EXPECT_THROW(validate_instance(inst), InstanceError);

  inst = testing::single_agv();
  inst.d_max = 0;
  EXPECT_THROW(validate_instance(inst), InstanceError);
}

TEST(Instance, MalformedDocumentsAreInstanceErrors) {
  EXPECT_THROW(load_instance("{not json"), InstanceError);
  EXPECT_THROW(load_instance("[]"), InstanceError);
  auto doc = instance_to_json(testing::single_agv());
  doc.erase("d_max");
  EXPECT_THROW(instance_from_json(doc), InstanceError);
  doc = instance_to_json(testing::single_agv());
  doc["agvs"][0]["pass_time"]["s0-s1"] = 3;
  EXPECT_THROW(instance_from_json(doc), InstanceError);
}

TEST(Instance, HeadwayOverrideTakesPrecedence) {
  auto inst = testing::following_toy();
  inst.headway_overrides.push_back({"a", "b", "s0", "s1", 5});
  EXPECT_EQ(inst.headway("a", "b", "s0", "s1"), 5);
  EXPECT_EQ(inst.headway("b", "a", "s0", "s1"), 2);
  EXPECT_EQ(load_instance(save_instance(inst)).headway("a", "b", "s0", "s1"), 5);
}

TEST(Generate, DeterministicAndValid) {
  const auto a = generate_instance(6, 7, 20, 3);
  const auto b = generate_instance(6, 7, 20, 3);
  EXPECT_EQ(a, b);
  EXPECT_NO_THROW(validate_instance(a));
  EXPECT_EQ(a.agvs.size(), 6u);
  EXPECT_EQ(a.topology.zones.size(), 7u);
  EXPECT_NE(save_instance(a), save_instance(generate_instance(6, 7, 20, 4)));
}

TEST(Rational, ParseAndFormat) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-4"), Rational(-4));
  EXPECT_THROW(parse_rational("x/2"), std::invalid_argument);
  EXPECT_EQ(to_string(Rational(43, 10)), "43/10");
  EXPECT_EQ(rational_from_double(1.0 / 3.0), Rational(1, 3));
}

}  // namespace
}  // namespace agv
