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

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "lags/errors.hpp"
#include "lags/experiment.hpp"

namespace {

// Exit codes: 0 ok, 1 run failed an invariant or diverged, 2 bad input, 3 corrupt artifacts.
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitIntegrity = 3;

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed,
            std::optional<std::string> out) {
  lags::RunOverrides overrides;
  overrides.seed = seed;
  if (out) overrides.output = *out;
  spdlog::info("running {}", config);
  const auto result = lags::run_experiment(config, overrides);
  for (const auto& arm : result.arms) {
    if (arm.run.diverged) {
      spdlog::error("arm {} diverged: {}", arm.name, arm.run.divergence_reason);
    } else if (arm.failed) {
      spdlog::error("arm {} failed an invariant check", arm.name);
    } else {
      spdlog::debug("arm {} final loss {}", arm.name, arm.run.final_loss());
    }
  }
  std::cout << result.summary;
  spdlog::info("artifacts written to {}", result.output.string());
  return result.exit_code == 0 ? 0 : kExitFailed;
}

int cmd_perf(const std::string& scenario, std::optional<std::string> out) {
  std::optional<std::filesystem::path> dir;
  if (out) dir = *out;
  const auto report = lags::run_perf(scenario, dir);
  std::cout << report.text();
  if (!dir) std::cout << "\n" << lags::timeline_csv(report.timeline);
  return 0;
}

int cmd_verify(const std::string& dir) {
  const auto report = lags::verify_run(dir);
  std::cout << report.text();
  return report.passed() ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-wise adaptive gradient sparsification: simulated training and analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string log_level = "info";
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out, "Override the output directory");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config;
  auto* run = app.add_subcommand("run", "Run every arm of an experiment config");
  run->add_option("config", config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);

  std::string scenario;
  auto* perf = app.add_subcommand("perf", "Evaluate a pipelining scenario");
  perf->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);

  std::string dir;
  auto* verify = app.add_subcommand("verify", "Re-check the invariants of a run directory");
  verify->add_option("dir", dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%l] %v");

  try {
    if (*run) return cmd_run(config, seed, out);
    if (*perf) return cmd_perf(scenario, out);
    if (*verify) return cmd_verify(dir);
  } catch (const lags::IntegrityError& e) {
    spdlog::error("integrity failure: {}", e.what());
    return kExitIntegrity;
  } catch (const lags::SchemaError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const lags::ParseError& e) {
    spdlog::error("parse error: {}", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  return 0;
}
