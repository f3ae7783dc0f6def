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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lags/dataset.hpp"
#include "lags/layered_vector.hpp"
#include "lags/models.hpp"
#include "lags/sparsifier.hpp"

namespace lags {

enum class Algorithm { kDense, kSlgs, kLags };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

enum class ScheduleKind { kConstant, kInvSqrtT, kDiminishing };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Learning-rate schedule over a horizon of T iterations, t = 0..T-1:
///   constant     alpha_t = theta
///   inv-sqrt-T   alpha_t = theta / sqrt(T)
///   diminishing  alpha_t = theta / (1 + t)
struct StepSizeSchedule {
  ScheduleKind kind = ScheduleKind::kInvSqrtT;
  double theta = 1.0;
  std::size_t horizon = 1;

  double at(std::size_t t) const;
  std::vector<double> history(std::size_t count) const;
};

/// Per-worker state: residual (error feedback) and the shard sampler.
struct WorkerState {
  std::size_t worker_id = 1;  // 1..P
  LayeredVector residual;
  std::optional<ShardSampler> sampler;
};

/// Workers with zero residuals; samplers own shard {i : i mod P == p - 1}
/// and are seeded from (seed, p) so that paired runs see the same batches.
std::vector<WorkerState> make_workers(const Model& model, const Dataset& data,
                                      std::size_t workers, std::uint64_t seed);

/// Evaluates G^p(v) for every worker on its next mini-batch. Returns the mean
/// of the per-worker batch losses.
double compute_worker_gradients(const Model& model, const Dataset& data, const LayeredVector& v,
                                std::span<WorkerState> workers, std::size_t batch_size,
                                std::vector<LayeredVector>& grads);

// The step functions take gradients already evaluated at the iteration-start
// v, so that the sparsified update and auxiliary_step see identical G^p(v).
// Worker contributions are always summed in p = 1..P order and divided by P.

/// v <- v - (1/P) sum_p alpha G^p.
void dense_step(LayeredVector& v, std::span<const LayeredVector> grads, double alpha);

/// Single-vector top-k with error feedback over the whole stacked gradient.
void slgs_step(LayeredVector& v, std::span<WorkerState> workers,
               std::span<const LayeredVector> grads, double alpha, std::size_t global_k);

/// Layer-wise top-k with error feedback, visiting layers L down to 1.
/// Returns the per-worker, per-layer chunks (outer index worker, inner in
/// backprop order L..1).
std::vector<std::vector<SparseChunk>> lags_step(LayeredVector& v, std::span<WorkerState> workers,
                                                std::span<const LayeredVector> grads, double alpha,
                                                const CompressionPolicy& policy);

/// x <- x - alpha (1/P) sum_p G^p.
void auxiliary_step(LayeredVector& x, std::span<const LayeredVector> grads, double alpha);

/// (1/P) sum_p eps^p.
LayeredVector mean_residual(std::span<const WorkerState> workers);

/// ||v - x - (1/P) sum_p eps^p||_inf.
double residual_identity_deviation(const LayeredVector& v, const LayeredVector& x,
                                   std::span<const WorkerState> workers);

struct TrainerConfig {
  Algorithm algorithm = Algorithm::kDense;
  std::size_t workers = 1;
  CompressionPolicy policy;
  StepSizeSchedule schedule;
  std::size_t iterations = 1;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  std::size_t log_every = 10;
  // Iterations between delta evaluations; 0 disables.
  std::size_t delta_every = 50;
  bool track_auxiliary = true;
  // Full-dataset gradient norm at every iterate (costly for data models).
  bool track_grad_norm = false;
  // Simulated wall-clock seconds per iteration, when a perf scenario is attached.
  std::optional<double> iteration_time;

  /// Throws ArgumentError / StructuralError on inconsistent settings.
  void validate(const Shape& shape) const;
};

struct IterationRecord {
  std::size_t t = 0;
  double loss = 0.0;
  // One entry per layer (one in total for SLGS); nullopt marks 0/0.
  std::vector<std::optional<double>> delta;
  double aux_gap_sq = 0.0;
  double identity_deviation = 0.0;
  std::vector<double> residual_norms;
  std::optional<double> grad_norm_sq;
  std::optional<double> avg_grad_norm_sq;
  std::optional<double> simulated_time;
};

struct TrainRun {
  std::vector<IterationRecord> records;
  LayeredVector params;
  LayeredVector auxiliary;
  LayeredVector mean_residual;
  std::vector<double> alphas;
  bool diverged = false;
  std::string divergence_reason;
  double max_identity_deviation = 0.0;
  // Largest ||(1/P) sum_p G^p||^2 seen along the run.
  double max_avg_grad_sq = 0.0;
  double initial_loss = 0.0;
  std::size_t iterations_done = 0;
  std::size_t delta_cells = 0;
  std::size_t delta_violations = 0;
  std::size_t delta_undefined = 0;

  double final_loss() const { return records.empty() ? 0.0 : records.back().loss; }
  double delta_violation_fraction() const;
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Runs the configured algorithm for T iterations from `initial` (or the
/// model's seeded initialization when null). Divergence stops the run and is
/// reported through TrainRun::diverged; records up to the last valid one are kept.
TrainRun train(const TrainerConfig& config, const Model& model, const Dataset& data,
               const LayeredVector* initial = nullptr);

}  // namespace lags
