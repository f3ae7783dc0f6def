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
#include <optional>
#include <string>
#include <vector>

#include "lags/sparsifier.hpp"

namespace lags {

/// Latency-bandwidth cost of one collective: m(P) * (a + b * bytes).
struct NetworkModel {
  double latency = 0.0;        // a, seconds per message
  double inv_bandwidth = 0.0;  // b, seconds per byte
  // m(P); defaults to the ring factor P - 1.
  std::optional<double> multiplier;

  double factor(std::size_t workers) const;
  void validate() const;
};

/// Bytes on the wire for a layer at ratio c: max(1, floor(d / c)) * (4 + 8).
std::size_t sparse_message_bytes(std::size_t dim, double ratio);

double comm_time(std::size_t dim, double ratio, const NetworkModel& network, std::size_t workers);

/// Per-layer timing inputs for one iteration. Vectors are indexed by layer id
/// minus one; backpropagation visits them from the back.
struct PipelineScenario {
  double forward_time = 0.0;              // t_f
  std::vector<double> backward_times;     // t_b(l) > 0
  std::vector<double> sparsify_times;     // t_spar(l) >= 0, empty means all zero
  std::vector<std::size_t> dims;          // d(l)
  NetworkModel network;
  std::size_t workers = 2;
  CompressionPolicy policy;
  // Explicit t_comm(l) overriding the network model when non-empty.
  std::vector<double> comm_times;
  // Fusion buffer capacity in bytes for the pipelined schedule; 0 disables.
  std::size_t fusion_capacity = 0;

  std::size_t num_layers() const { return backward_times.size(); }
  double sparsify_time(std::size_t layer) const;
  /// t_comm(l) for the configured policy.
  double layer_comm_time(std::size_t layer) const;
  double total_backward() const;
  double total_comm() const;
  double total_sparsify() const;

  void validate() const;
};

enum class ScheduleMode { kNoOverlap, kPipelined };

struct TimelineEvent {
  std::string event;
  std::string resource;  // compute | network
  double start = 0.0;
  double end = 0.0;
};

struct ScheduleResult {
  double makespan = 0.0;
  std::vector<TimelineEvent> timeline;
};

/// No-overlap: forward, backward L..1, then every layer's sparsify and
/// communicate back to back. Pipelined: layer l's communication is released
/// once its backward pass and sparsification finish on the compute resource;
/// the network serves releases one at a time in release order.
ScheduleResult schedule(const PipelineScenario& scenario, ScheduleMode mode);

/// Ideal pipelining speedup (t_f + t_b + t_c) / (t_f + t_b + t_c - min(t_b, t_c)).
double s_max(double t_forward, double t_backward, double t_comm);

/// The same bound written as 1 + 1 / (t_f / min(t_c, t_b) + max(r, 1/r)), r = t_c / t_b.
double s_max_ratio_form(double t_forward, double t_backward, double t_comm);

inline const std::vector<double> kDefaultRatioGrid = {1, 2, 5, 10, 25, 50, 100, 250, 500, 1000};

/// Smallest grid ratio whose communication plus sparsification fits in the
/// backward time it can hide behind, clamped to c_u; c_u when nothing fits.
/// Layer l > 1 hides behind the backward pass of layer l - 1; layer 1, the
/// last to finish, uses its own backward time.
CompressionPolicy select_ratios(const PipelineScenario& scenario, double ratio_cap,
                                const std::vector<double>& grid = kDefaultRatioGrid);

std::string timeline_csv(const ScheduleResult& result);

}  // namespace lags
