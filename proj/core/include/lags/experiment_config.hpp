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
#include <string_view>
#include <vector>

#include "lags/dataset.hpp"
#include "lags/models.hpp"
#include "lags/optimizer.hpp"

namespace lags {

struct ArmSpec {
  std::string name;
  TrainerConfig trainer;
};

struct AnalysisOptions {
  // Bound calculators and the rate check (quadratic model only).
  bool bounds = true;
  // Monte-Carlo draws per trace point for the M^2 estimate.
  std::size_t m2_draws = 8;
  // f(x0) - f(x*); exact for the quadratic, taken as the initial loss otherwise.
  std::optional<double> gap;
};

/// One experiment: a model, a dataset and several paired arms that share the
/// seed, the initial parameters and the worker shards.
///
/// INI layout (see configs/ for complete files):
///
///   seed = 1
///   output = runs/logistic
///
///   [model]     kind, hidden, layer_dims, eigen_min, eigen_max
///   [dataset]   kind, samples, features, classes, separation, noise
///   [train]     workers, iterations, batch_size, schedule, theta,
///               log_every, delta_every, track_auxiliary, track_grad_norm
///   [arm:NAME]  algorithm, ratio | ratios, and optional schedule / theta
///   [analysis]  bounds, m2_draws, gap
///   [perf]      scenario (path relative to the config file)
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output = "runs/default";
  ModelSpec model;
  // Unset for the data-free quadratic.
  std::optional<DatasetSpec> dataset;
  std::vector<ArmSpec> arms;
  AnalysisOptions analysis;
  std::optional<std::filesystem::path> perf_scenario;

  /// Seeds every component from `seed`; called again after overrides.
  void apply_seed(std::uint64_t new_seed);
};

/// Throws ParseError on INI syntax errors and SchemaError listing every
/// offending key (unknown, missing or with a bad value).
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace lags
