// Copyright 2026 The lags Authors. All Rights Reserved.
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
// =============================================================================

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lags/errors.hpp"
#include "lags/experiment.hpp"
#include "lags/snapshot.hpp"

using namespace lags;
namespace fs = std::filesystem;

namespace {

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("lags_exp_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& body) {
    auto path = root_ / "exp.ini";
    std::ofstream(path) << body;
    return path;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path root_;
};

const char* kThreeArms =
    "seed = 2\n"
    "[model]\n"
    "kind = quadratic\n"
    "layer_dims = 12, 6\n"
    "[train]\n"
    "workers = 2\n"
    "iterations = 120\n"
    "theta = 1.0\n"
    "log_every = 10\n"
    "delta_every = 10\n"
    "[arm:dense]\n"
    "algorithm = dense\n"
    "[arm:lossless]\n"
    "algorithm = lags\n"
    "ratio = 1\n"
    "[arm:lags]\n"
    "algorithm = lags\n"
    "ratio = 3\n";

const char* kLogistic =
    "seed = 4\n"
    "[model]\n"
    "kind = logistic\n"
    "[dataset]\n"
    "samples = 2000\n"
    "features = 20\n"
    "[train]\n"
    "workers = 4\n"
    "iterations = 2000\n"
    "batch_size = 32\n"
    "theta = 5\n"
    "log_every = 100\n"
    "delta_every = 100\n"
    "[arm:dense]\n"
    "algorithm = dense\n"
    "[arm:slgs]\n"
    "algorithm = slgs\n"
    "ratio = 10\n"
    "[arm:lags]\n"
    "algorithm = lags\n"
    "ratio = 10\n"
    "[analysis]\n"
    "bounds = false\n";

}  // namespace

TEST_F(ExperimentTest, RunThenVerify) {
  auto cfg = write_config(kThreeArms);
  auto result = run_experiment(cfg, {std::nullopt, root_ / "run"});
  EXPECT_EQ(result.exit_code, 0);
  ASSERT_EQ(result.arms.size(), 3u);
  for (const char* f : {"summary.txt", "manifest.json", "dense/metrics.jsonl", "dense/analysis.json",
                        "lags/checkpoint.bin", "lags/residual_mean.bin"}) {
    EXPECT_TRUE(fs::exists(root_ / "run" / f)) << f;
  }
  auto report = verify_run(root_ / "run");
  EXPECT_TRUE(report.passed()) << report.text();
  bool saw_dense_delta = false, saw_degeneracy = false;
  for (const auto& c : report.checks) {
    if (c.arm == "dense" && c.name == "delta") {
      saw_dense_delta = true;
      EXPECT_EQ(c.status, "n/a");
    }
    if (c.name == "degeneracy") {
      saw_degeneracy = true;
      EXPECT_EQ(c.status, "pass");
    }
  }
  EXPECT_TRUE(saw_dense_delta);
  EXPECT_TRUE(saw_degeneracy);
  auto analysis = nlohmann::json::parse(slurp(root_ / "run" / "lags" / "analysis.json"));
  EXPECT_EQ(analysis["status"], "pass");
  EXPECT_TRUE(analysis.contains("bounds"));
}

TEST_F(ExperimentTest, RerunIsByteIdenticalOutsideTheManifest) {
  auto cfg = write_config(kThreeArms);
  run_experiment(cfg, {std::nullopt, root_ / "a"});
  run_experiment(cfg, {std::nullopt, root_ / "b"});
  for (const char* f : {"summary.txt", "dense/metrics.jsonl", "lags/metrics.jsonl", "lags/analysis.json",
                        "lags/checkpoint.bin"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
  run_experiment(cfg, {std::uint64_t{99}, root_ / "c"});
  EXPECT_NE(slurp(root_ / "a" / "lags/metrics.jsonl"), slurp(root_ / "c" / "lags/metrics.jsonl"));
}

TEST_F(ExperimentTest, DenseAndLosslessTracesMatch) {
  auto cfg = write_config(kThreeArms);
  auto result = run_experiment(cfg, {std::nullopt, root_ / "run"});
  ASSERT_EQ(result.arms.size(), 3u);
  const auto& a = result.arms[0].run.records;
  const auto& b = result.arms[1].run.records;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].loss, b[i].loss);
}

TEST_F(ExperimentTest, CorruptCheckpointIsNamed) {
  auto cfg = write_config(kThreeArms);
  run_experiment(cfg, {std::nullopt, root_ / "run"});
  auto ckpt = root_ / "run" / "lags" / "checkpoint.bin";
  auto bytes = read_file_bytes(ckpt);
  bytes[bytes.size() / 2] ^= 0x01;
  write_file_atomic(ckpt, bytes);
  try {
    verify_run(root_ / "run");
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("lags/checkpoint.bin"), std::string::npos) << e.what();
  }
}

TEST_F(ExperimentTest, MissingArtifactIsNamed) {
  auto cfg = write_config(kThreeArms);
  run_experiment(cfg, {std::nullopt, root_ / "run"});
  fs::remove(root_ / "run" / "dense" / "metrics.jsonl");
  EXPECT_THROW(verify_run(root_ / "run"), IntegrityError);
  EXPECT_THROW(verify_run(root_ / "nowhere"), IntegrityError);
}

TEST_F(ExperimentTest, LogisticArmsFinishClose) {
  auto cfg = write_config(kLogistic);
  auto result = run_experiment(cfg, {std::nullopt, root_ / "run"});
  ASSERT_EQ(result.exit_code, 0);
  const double dense = result.arms[0].run.final_loss();
  for (const auto& arm : result.arms) {
    EXPECT_NEAR(arm.run.final_loss(), dense, 0.05 * dense) << arm.name;
  }
}

TEST_F(ExperimentTest, DivergenceGivesNonzeroExit) {
  auto cfg = write_config(
      "[model]\nkind = quadratic\nlayer_dims = 8\n"
      "[train]\niterations = 400\nschedule = constant\ntheta = 5\n"
      "[arm:dense]\nalgorithm = dense\n");
  auto result = run_experiment(cfg, {std::nullopt, root_ / "run"});
  EXPECT_NE(result.exit_code, 0);
  EXPECT_TRUE(result.arms[0].run.diverged);
}

TEST_F(ExperimentTest, PerfScenarioAttachesSimulatedTime) {
  std::ofstream(root_ / "s.scenario") << "dims = 12, 6\nt_b = 1, 1\nt_comm = 1, 1\n";
  std::string body = kThreeArms;
  body += "[perf]\nscenario = s.scenario\n";
  auto result = run_experiment(write_config(body), {std::nullopt, root_ / "run"});
  EXPECT_TRUE(fs::exists(root_ / "run" / "timeline.csv"));
  // Dense runs without overlap (4 s per iteration); LAGS is pipelined (3 s).
  EXPECT_EQ(result.arms[0].run.records.back().simulated_time, 4.0 * 120);
  EXPECT_EQ(result.arms[2].run.records.back().simulated_time, 3.0 * 120);
}

TEST(Perf, TwoLayerReport) {
  auto report = run_perf(parse_scenario("dims = 10, 10\nt_b = 1, 1\nt_comm = 1, 1\n"));
  EXPECT_EQ(report.no_overlap, 4.0);
  EXPECT_EQ(report.pipelined, 3.0);
  EXPECT_NEAR(report.speedup, 4.0 / 3.0, 1e-15);
  EXPECT_GE(report.s_max + 1e-12, report.speedup);
  auto j = report.to_json();
  EXPECT_EQ(j["pipelined_makespan"], 3.0);
}

TEST(Perf, NoCommunicationGivesUnitSpeedup) {
  auto report = run_perf(parse_scenario("dims = 10, 10\nt_b = 1, 2\nt_f = 0.5\nt_comm = 0, 0\n"));
  EXPECT_EQ(report.speedup, 1.0);
  EXPECT_EQ(report.s_max, 1.0);
}

TEST(Perf, BalancedScenarioNearItsBound) {
  auto report = run_perf(parse_scenario("dims = 10, 10, 10, 10\nt_f = 0.01\nt_b = 1, 1, 1, 1\n"
                                        "t_comm = 1, 1, 1, 1\n"));
  EXPECT_GE(report.speedup, 1.0);
  EXPECT_LE(report.speedup, report.s_max + 1e-12);
  EXPECT_GT(report.s_max, 1.9);
}

TEST(Perf, MalformedScenarioHasLine) {
  auto dir = fs::temp_directory_path() / "lags_perf_bad";
  fs::create_directories(dir);
  std::ofstream(dir / "bad.scenario") << "dims = 1\n\nt_b = x\n";
  try {
    run_perf(dir / "bad.scenario", std::nullopt);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  fs::remove_all(dir);
}
