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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lags/experiment_config.hpp"
#include "lags/optimizer.hpp"
#include "lags/perf.hpp"
#include "lags/scenario_file.hpp"

namespace lags {

inline constexpr double kIdentityTolerance = 1e-9;

struct ArmOutcome {
  std::string name;
  Algorithm algorithm = Algorithm::kDense;
  TrainRun run;
  nlohmann::json analysis;
  bool failed = false;
};

struct ExperimentResult {
  std::filesystem::path output;
  std::vector<ArmOutcome> arms;
  std::string summary;
  // 0 when every arm finished and every hard invariant held.
  int exit_code = 0;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
};

/// Runs every arm and writes, per arm under <output>/<arm>/:
///   metrics.jsonl, analysis.json, checkpoint.bin, auxiliary.bin, residual_mean.bin
/// and at the top level summary.txt, manifest.json and, with a perf
/// scenario, timeline.csv. Everything except manifest.json is a pure
/// function of the config.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const std::filesystem::path& config_path,
                                const RunOverrides& overrides = {});

/// One JSON object per logged record.
nlohmann::json record_to_json(const IterationRecord& record);

struct PerfReport {
  double no_overlap = 0.0;
  double pipelined = 0.0;
  double speedup = 1.0;
  // Computed with the effective compute time t_b + t_spar; 1 without communication.
  double s_max = 1.0;
  double t_f = 0.0;
  double t_b = 0.0;
  double t_spar = 0.0;
  double t_c = 0.0;
  // Chosen by select_ratios when the scenario uses the network model;
  // otherwise the configured policy.
  CompressionPolicy selected;
  bool ratios_selected = false;
  ScheduleResult timeline;

  nlohmann::json to_json() const;
  std::string text() const;
};

PerfReport run_perf(const ScenarioFile& scenario);

/// Writes perf.json and timeline.csv into `out_dir`.
PerfReport run_perf(const std::filesystem::path& scenario_path,
                    const std::optional<std::filesystem::path>& out_dir);

struct VerifyCheck {
  std::string arm;
  std::string name;
  std::string status;  // pass | fail | n/a
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
  std::string text() const;
};

/// Re-derives the invariants from a run directory. Missing, truncated or
/// altered artifacts raise IntegrityError naming the file.
VerifyReport verify_run(const std::filesystem::path& dir);

}  // namespace lags
