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

#include "lags/perf.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <map>
#include <string>

#include "lags/errors.hpp"

namespace lags {
namespace {

constexpr std::size_t kEntryBytes = 4 + 8;

void require_time(double v, const std::string& what) {
  if (!std::isfinite(v) || v < 0.0) throw ArgumentError(what + " must be finite and >= 0");
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string layer_event(const char* kind, std::size_t layer) {
  return std::string(kind) + ":" + std::to_string(layer);
}

}  // namespace

double NetworkModel::factor(std::size_t workers) const {
  if (multiplier) return *multiplier;
  return workers >= 2 ? static_cast<double>(workers - 1) : 1.0;
}

void NetworkModel::validate() const {
  require_time(latency, "latency");
  require_time(inv_bandwidth, "inverse bandwidth");
  if (multiplier && (!std::isfinite(*multiplier) || *multiplier < 1.0)) {
    throw ArgumentError("collective multiplier must be >= 1");
  }
}

std::size_t sparse_message_bytes(std::size_t dim, double ratio) {
  if (dim == 0) throw ArgumentError("layer dim must be positive");
  return k_from_ratio(dim, ratio) * kEntryBytes;
}

double comm_time(std::size_t dim, double ratio, const NetworkModel& network, std::size_t workers) {
  const auto bytes = static_cast<double>(sparse_message_bytes(dim, ratio));
  return network.factor(workers) * (network.latency + network.inv_bandwidth * bytes);
}

double PipelineScenario::sparsify_time(std::size_t layer) const {
  return sparsify_times.empty() ? 0.0 : sparsify_times.at(layer - 1);
}

double PipelineScenario::layer_comm_time(std::size_t layer) const {
  if (!comm_times.empty()) return comm_times.at(layer - 1);
  const double c = policy.ratio(static_cast<std::uint32_t>(layer));
  return comm_time(dims.at(layer - 1), c, network, workers);
}

double PipelineScenario::total_backward() const {
  double s = 0.0;
  for (double t : backward_times) s += t;
  return s;
}

double PipelineScenario::total_comm() const {
  double s = 0.0;
  for (std::size_t l = 1; l <= num_layers(); ++l) s += layer_comm_time(l);
  return s;
}

double PipelineScenario::total_sparsify() const {
  double s = 0.0;
  for (double t : sparsify_times) s += t;
  return s;
}

void PipelineScenario::validate() const {
  const std::size_t n = num_layers();
  if (n == 0) throw ArgumentError("scenario has no layers");
  require_time(forward_time, "forward time");
  for (double t : backward_times) {
    if (!std::isfinite(t) || t <= 0.0) throw ArgumentError("backward times must be positive");
  }
  if (!sparsify_times.empty() && sparsify_times.size() != n) {
    throw ArgumentError("sparsify times must match the layer count");
  }
  for (double t : sparsify_times) require_time(t, "sparsify time");
  if (!comm_times.empty()) {
    if (comm_times.size() != n) throw ArgumentError("comm times must match the layer count");
    for (double t : comm_times) require_time(t, "comm time");
    if (fusion_capacity > 0) throw ArgumentError("fusion needs the network model, not explicit comm times");
    return;
  }
  if (dims.size() != n) throw ArgumentError("layer dims must match the layer count");
  for (auto d : dims) {
    if (d == 0) throw ArgumentError("layer dims must be positive");
  }
  if (workers < 1) throw ArgumentError("workers must be >= 1");
  network.validate();
  for (std::size_t l = 1; l <= n; ++l) policy.ratio(static_cast<std::uint32_t>(l));
}

ScheduleResult schedule(const PipelineScenario& scenario, ScheduleMode mode) {
  scenario.validate();
  const std::size_t n = scenario.num_layers();
  ScheduleResult out;
  auto emit = [&](std::string event, const char* resource, double start, double end) {
    out.timeline.push_back({std::move(event), resource, start, end});
  };

  double clock = 0.0;
  if (scenario.forward_time > 0.0) emit("forward", "compute", 0.0, scenario.forward_time);
  clock = scenario.forward_time;

  if (mode == ScheduleMode::kNoOverlap) {
    for (std::size_t l = n; l >= 1; --l) {
      const double t = scenario.backward_times[l - 1];
      emit(layer_event("backward", l), "compute", clock, clock + t);
      clock += t;
    }
    for (std::size_t l = n; l >= 1; --l) {
      const double ts = scenario.sparsify_time(l);
      if (ts > 0.0) emit(layer_event("sparsify", l), "compute", clock, clock + ts);
      clock += ts;
      const double tc = scenario.layer_comm_time(l);
      emit(layer_event("comm", l), "network", clock, clock + tc);
      clock += tc;
    }
    out.makespan = clock;
    return out;
  }

  // Pipelined: the compute resource runs backward(l) then sparsify(l) for
  // l = L..1; each completion releases a job to the single network channel.
  struct Job {
    std::string name;
    double release;
    double duration;
  };
  std::vector<Job> jobs;
  const bool fused = scenario.fusion_capacity > 0;
  std::size_t pending_bytes = 0;
  std::vector<std::size_t> pending_layers;
  for (std::size_t l = n; l >= 1; --l) {
    const double t = scenario.backward_times[l - 1];
    emit(layer_event("backward", l), "compute", clock, clock + t);
    clock += t;
    const double ts = scenario.sparsify_time(l);
    if (ts > 0.0) emit(layer_event("sparsify", l), "compute", clock, clock + ts);
    clock += ts;
    if (!fused) {
      jobs.push_back({layer_event("comm", l), clock, scenario.layer_comm_time(l)});
      continue;
    }
    const double c = scenario.policy.ratio(static_cast<std::uint32_t>(l));
    pending_bytes += sparse_message_bytes(scenario.dims[l - 1], c);
    pending_layers.push_back(l);
    if (pending_bytes >= scenario.fusion_capacity || l == 1) {
      std::string name = "comm:";
      for (std::size_t i = 0; i < pending_layers.size(); ++i) {
        if (i > 0) name += "+";
        name += std::to_string(pending_layers[i]);
      }
      const auto& net = scenario.network;
      const double tc = net.factor(scenario.workers) *
                        (net.latency + net.inv_bandwidth * static_cast<double>(pending_bytes));
      jobs.push_back({std::move(name), clock, tc});
      pending_bytes = 0;
      pending_layers.clear();
    }
  }

  double network_free = 0.0;
  double last_end = clock;
  for (const auto& job : jobs) {
    const double start = std::max(job.release, network_free);
    const double end = start + job.duration;
    emit(job.name, "network", start, end);
    network_free = end;
    last_end = std::max(last_end, end);
  }
  out.makespan = last_end;
  std::stable_sort(out.timeline.begin(), out.timeline.end(),
                   [](const TimelineEvent& a, const TimelineEvent& b) { return a.start < b.start; });
  return out;
}

double s_max(double t_forward, double t_backward, double t_comm) {
  if (!std::isfinite(t_forward) || t_forward < 0.0) throw ArgumentError("t_f must be >= 0");
  if (!(t_backward > 0.0) || !std::isfinite(t_backward)) throw ArgumentError("t_b must be positive");
  if (!(t_comm > 0.0) || !std::isfinite(t_comm)) throw ArgumentError("t_c must be positive");
  const double total = t_forward + t_backward + t_comm;
  return total / (total - std::min(t_backward, t_comm));
}

double s_max_ratio_form(double t_forward, double t_backward, double t_comm) {
  s_max(t_forward, t_backward, t_comm);
  const double r = t_comm / t_backward;
  return 1.0 + 1.0 / (t_forward / std::min(t_comm, t_backward) + std::max(r, 1.0 / r));
}

CompressionPolicy select_ratios(const PipelineScenario& scenario, double ratio_cap,
                                const std::vector<double>& grid) {
  if (grid.empty()) throw ArgumentError("ratio grid is empty");
  if (!(ratio_cap >= 1.0) || !std::isfinite(ratio_cap)) throw ArgumentError("c_u must be >= 1");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 1.0) || !std::isfinite(grid[i])) throw ArgumentError("grid ratios must be >= 1");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ArgumentError("ratio grid must be ascending");
  }
  const std::size_t n = scenario.num_layers();
  if (n == 0) throw ArgumentError("scenario has no layers");
  if (scenario.dims.size() != n) throw ArgumentError("layer dims must match the layer count");
  scenario.network.validate();

  std::map<std::uint32_t, double> ratios;
  for (std::size_t l = 1; l <= n; ++l) {
    const double budget = l > 1 ? scenario.backward_times[l - 2] : scenario.backward_times[0];
    const double ts = scenario.sparsify_time(l);
    double chosen = ratio_cap;
    for (double c : grid) {
      if (comm_time(scenario.dims[l - 1], c, scenario.network, scenario.workers) + ts <= budget) {
        chosen = std::min(c, ratio_cap);
        break;
      }
    }
    ratios[static_cast<std::uint32_t>(l)] = chosen;
  }
  return CompressionPolicy(std::move(ratios), ratio_cap);
}

std::string timeline_csv(const ScheduleResult& result) {
  std::string out = "event,resource,start,end\n";
  for (const auto& e : result.timeline) {
    out += e.event + ',' + e.resource + ',' + shortest(e.start) + ',' + shortest(e.end) + '\n';
  }
  return out;
}

}  // namespace lags
