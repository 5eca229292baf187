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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "agv/cli.hpp"
#include "fixtures.hpp"

namespace agv {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "agv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("agv_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

std::string data_file(const char* name) { return std::string(AGV_DATA_DIR) + "/" + name; }

TEST_F(Cli, BuildReportsSizes) {
  const auto r = run_cli({"build", "--instance", data_file("factory.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["n_int"], 48);
  EXPECT_EQ(j["n_bin"], 70);
  EXPECT_EQ(j["n_eq"], 55);
  EXPECT_EQ(j["n_ineq"], 127);
  EXPECT_TRUE(j["within_bounds"].get<bool>());

  ASSERT_EQ(run_cli({"build", "--instance", "builtin:factory", "--out", dir_.string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "model.lp"));
  EXPECT_TRUE(fs::exists(dir_ / "sizes.json"));
}

TEST_F(Cli, SolveCheckAndDiagram) {
  const auto report = path("report.json");
  const auto svg = path("best.svg");
  const auto r = run_cli({"solve", "--instance", "builtin:factory", "--solver", "bnb", "--out", report, "--diagram", svg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(cli::read_file(report));
  EXPECT_EQ(j["objective_exact"], "43/10");
  EXPECT_TRUE(j["certified"].get<bool>());
  EXPECT_TRUE(fs::exists(svg));

  const auto c = run_cli({"check", "--instance", "builtin:factory", "--schedule", report});
  EXPECT_EQ(c.code, 0);
  EXPECT_NE(c.out.find("feasible, objective 43/10"), std::string::npos);

  const auto d = run_cli({"diagram", "--instance", "builtin:factory", "--schedule", report});
  EXPECT_EQ(d.code, 0);
  EXPECT_NE(d.out.find("<svg"), std::string::npos);
}

TEST_F(Cli, CheckFlagsViolations) {
  const auto inst = testing::shared_zone_toy();
  cli::write_file(path("toy.json"), save_instance(inst));
  cli::write_file(path("bad.json"), schedule_to_json(inst, Schedule{{{0}, {0}}, {{1}, {1}}}).dump());
  const auto r = run_cli({"check", "--instance", path("toy.json"), "--schedule", path("bad.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("zc: zone s0"), std::string::npos);
}

TEST_F(Cli, InfeasibleAndLimitExitCodes) {
  Instance inst;
  inst.topology = testing::corridor(1);
  inst.d_max = 2;
  for (const char* id : {"a", "b", "c"}) inst.agvs.push_back(testing::make_agv(id, {"s0"}, 0, 2, 0));
  cli::write_file(path("tight.json"), save_instance(inst));
  EXPECT_EQ(run_cli({"solve", "--instance", path("tight.json")}).code, 2);
  EXPECT_EQ(run_cli({"solve", "--instance", path("tight.json"), "--solver", "oracle"}).code, 2);
}

TEST_F(Cli, HeuristicSolveOnToy) {
  cli::write_file(path("toy.json"), save_instance(testing::shared_zone_toy()));
  const auto r = run_cli({"solve", "--instance", path("toy.json"), "--solver", "sa", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["objective_exact"], "3/2");
  EXPECT_EQ(j["details"]["qubo_bits"], 20);
  EXPECT_FALSE(j["certified"].get<bool>());
}

TEST_F(Cli, ConvertAndSampleRawModel) {
  cli::write_file(path("toy.json"), save_instance(testing::shared_zone_toy()));
  ASSERT_EQ(run_cli({"convert", "--instance", path("toy.json"), "--to", "ising", "--out", path("m.coo")}).code, 0);
  std::istringstream coo(cli::read_file(path("m.coo")));
  EXPECT_EQ(read_ising_coo(coo).n_spins, 20u);
  const auto r = run_cli({"solve", "--model", path("m.coo"), "--kind", "ising", "--solver", "sbm", "--params",
                          "replicas=4,steps=200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("samples"));
}

TEST_F(Cli, BenchWritesCsv) {
  const auto r = run_cli({"bench", "--grid", "2,4,10;3,4,10", "--seeds", "2", "--solver", "bnb,oracle"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(r.out);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, cli::kBenchHeader);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15) << line;
  }
  EXPECT_EQ(rows, 2u * 2u * 2u);
}

TEST_F(Cli, BenchRoutesParametersPerSolver) {
  const auto r = run_cli({"bench", "--grid", "2,4,10", "--solver", "bnb,sa", "--params", "sweeps=50,restarts=4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run_cli({"bench", "--grid", "2,4,10", "--solver", "bnb", "--params", "sweeps=50"}).code, 4);
}

TEST_F(Cli, BadInputExitsWithFour) {
  EXPECT_EQ(run_cli({}).code, 4);
  EXPECT_EQ(run_cli({"solve", "--instance", path("missing.json")}).code, 4);
  cli::write_file(path("broken.json"), "{ not json");
  EXPECT_EQ(run_cli({"build", "--instance", path("broken.json")}).code, 4);
  EXPECT_EQ(run_cli({"solve", "--instance", "builtin:factory", "--params", "bogus=1"}).code, 4);
  EXPECT_EQ(run_cli({"solve", "--instance", "builtin:factory", "--solver", "magic"}).code, 4);
  EXPECT_EQ(run_cli({"bench", "--grid", "2,x,4"}).code, 4);
  EXPECT_EQ(run_cli({"solve", "--instance", "gen:0,4,5,1"}).code, 4);
}

TEST_F(Cli, BinaryRuns) {
  const std::string cmd = std::string(AGV_CLI_PATH) + " build --instance builtin:factory > " + path("o.json");
  const int status = std::system(cmd.c_str());
  ASSERT_EQ(status, 0);
  EXPECT_EQ(nlohmann::json::parse(cli::read_file(path("o.json")))["n_bin"], 70);
}

}  // namespace
}  // namespace agv
