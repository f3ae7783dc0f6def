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

#include "lags/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lags/analysis.hpp"
#include "lags/errors.hpp"

namespace lags {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_grads(const LayeredVector& v, std::span<const LayeredVector> grads) {
  if (grads.empty()) throw ArgumentError("no worker gradients");
  for (const auto& g : grads) require_same_shape(v, g);
}

void require_workers(std::span<const WorkerState> workers, std::span<const LayeredVector> grads) {
  if (workers.size() != grads.size()) {
    throw StructuralError("worker count does not match gradient count");
  }
}

// v <- v - sum / P, elementwise.
void apply_average(LayeredVector& v, const LayeredVector& sum, std::size_t workers) {
  const double p = static_cast<double>(workers);
  auto vs = v.data();
  auto ss = sum.data();
  for (std::size_t i = 0; i < vs.size(); ++i) vs[i] -= ss[i] / p;
}

LayeredVector scaled_sum(std::span<const LayeredVector> grads, double alpha) {
  LayeredVector sum(grads.front().shape());
  auto ss = sum.data();
  for (const auto& g : grads) {
    auto gs = g.data();
    for (std::size_t i = 0; i < ss.size(); ++i) ss[i] += alpha * gs[i];
  }
  return sum;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDense:
      return "dense";
    case Algorithm::kSlgs:
      return "slgs";
    case Algorithm::kLags:
      return "lags";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "dense") return Algorithm::kDense;
  if (name == "slgs") return Algorithm::kSlgs;
  if (name == "lags") return Algorithm::kLags;
  throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant:
      return "constant";
    case ScheduleKind::kInvSqrtT:
      return "inv-sqrt-T";
    case ScheduleKind::kDiminishing:
      return "diminishing";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "inv-sqrt-T" || name == "inv-sqrt-t") return ScheduleKind::kInvSqrtT;
  if (name == "diminishing") return ScheduleKind::kDiminishing;
  throw ArgumentError("unknown step-size schedule '" + std::string(name) + "'");
}

double StepSizeSchedule::at(std::size_t t) const {
  switch (kind) {
    case ScheduleKind::kConstant:
      return theta;
    case ScheduleKind::kInvSqrtT:
      return theta / std::sqrt(static_cast<double>(horizon));
    case ScheduleKind::kDiminishing:
      return theta / (1.0 + static_cast<double>(t));
  }
  return theta;
}

std::vector<double> StepSizeSchedule::history(std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t t = 0; t < count; ++t) out[t] = at(t);
  return out;
}

std::vector<WorkerState> make_workers(const Model& model, const Dataset& data,
                                      std::size_t workers, std::uint64_t seed) {
  if (workers == 0) throw ArgumentError("worker count must be positive");
  std::vector<WorkerState> out;
  out.reserve(workers);
  for (std::size_t p = 0; p < workers; ++p) {
    WorkerState w;
    w.worker_id = p + 1;
    w.residual = LayeredVector(model.shape());
    if (model.uses_data()) {
      w.sampler.emplace(data.shard(p, workers), splitmix64(seed ^ splitmix64(p + 1)));
    }
    out.push_back(std::move(w));
  }
  return out;
}

double compute_worker_gradients(const Model& model, const Dataset& data, const LayeredVector& v,
                                std::span<WorkerState> workers, std::size_t batch_size,
                                std::vector<LayeredVector>& grads) {
  grads.resize(workers.size());
  double loss = 0.0;
  for (std::size_t p = 0; p < workers.size(); ++p) {
    std::vector<std::size_t> batch;
    if (workers[p].sampler) batch = workers[p].sampler->next(batch_size);
    loss += model.evaluate(v, data, batch, &grads[p]);
  }
  return loss / static_cast<double>(workers.size());
}

void dense_step(LayeredVector& v, std::span<const LayeredVector> grads, double alpha) {
  require_grads(v, grads);
  apply_average(v, scaled_sum(grads, alpha), grads.size());
}

void slgs_step(LayeredVector& v, std::span<WorkerState> workers,
               std::span<const LayeredVector> grads, double alpha, std::size_t global_k) {
  require_grads(v, grads);
  require_workers(workers, grads);
  if (global_k < 1 || global_k > v.size()) throw ArgumentError("global k outside [1, d]");

  LayeredVector sum(v.shape());
  for (std::size_t p = 0; p < workers.size(); ++p) {
    auto acc = workers[p].residual.data();
    auto g = grads[p].data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += alpha * g[i];
    auto chunk = top_k(acc, global_k);
    for (const auto& e : chunk.entries) acc[e.index] -= e.value;
    scatter_add(chunk, sum.data());
  }
  apply_average(v, sum, workers.size());
}

std::vector<std::vector<SparseChunk>> lags_step(LayeredVector& v, std::span<WorkerState> workers,
                                                std::span<const LayeredVector> grads, double alpha,
                                                const CompressionPolicy& policy) {
  require_grads(v, grads);
  require_workers(workers, grads);
  policy.validate_for(v.shape());

  std::vector<std::vector<SparseChunk>> sent(workers.size());
  for (std::size_t l = v.num_layers(); l >= 1; --l) {
    const auto& s = v.shape()[l - 1];
    const auto k = policy.k_for(s.layer_id, s.dim);
    std::vector<double> layer_sum(s.dim, 0.0);
    for (std::size_t p = 0; p < workers.size(); ++p) {
      auto acc = workers[p].residual.layer(l);
      auto g = grads[p].layer(l);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += alpha * g[i];
      auto chunk = top_k(acc, k, s.layer_id);
      for (const auto& e : chunk.entries) acc[e.index] -= e.value;
      scatter_add(chunk, layer_sum);
      sent[p].push_back(std::move(chunk));
    }
    auto vl = v.layer(l);
    const double np = static_cast<double>(workers.size());
    for (std::size_t i = 0; i < vl.size(); ++i) vl[i] -= layer_sum[i] / np;
  }
  return sent;
}

void auxiliary_step(LayeredVector& x, std::span<const LayeredVector> grads, double alpha) {
  dense_step(x, grads, alpha);
}

LayeredVector mean_residual(std::span<const WorkerState> workers) {
  if (workers.empty()) throw ArgumentError("no workers");
  LayeredVector sum(workers.front().residual.shape());
  for (const auto& w : workers) axpy_inplace(1.0, w.residual, sum);
  const double p = static_cast<double>(workers.size());
  for (auto& x : sum.data()) x /= p;
  return sum;
}

double residual_identity_deviation(const LayeredVector& v, const LayeredVector& x,
                                   std::span<const WorkerState> workers) {
  require_same_shape(v, x);
  const auto eps = mean_residual(workers);
  require_same_shape(v, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    worst = std::max(worst, std::abs(v[i] - x[i] - eps[i]));
  }
  return worst;
}

void TrainerConfig::validate(const Shape& shape) const {
  if (workers < 1) throw ArgumentError("worker count must be at least 1");
  if (iterations < 1) throw ArgumentError("iteration budget must be at least 1");
  if (batch_size < 1) throw ArgumentError("batch size must be at least 1");
  if (log_every < 1) throw ArgumentError("log cadence must be at least 1");
  if (!(schedule.theta > 0.0)) throw ArgumentError("step-size scale must be positive");
  if (schedule.horizon < 1) throw ArgumentError("schedule horizon must be at least 1");
  policy.validate_for(shape);
  if (algorithm == Algorithm::kDense && !policy.is_lossless()) {
    throw ArgumentError("dense training requires all compression ratios to be 1");
  }
}

double TrainRun::delta_violation_fraction() const {
  const std::size_t defined = delta_cells - delta_undefined;
  return defined == 0 ? 0.0 : static_cast<double>(delta_violations) / static_cast<double>(defined);
}

TrainRun train(const TrainerConfig& config, const Model& model, const Dataset& data,
               const LayeredVector* initial) {
  config.validate(model.shape());
  const std::size_t total = config.iterations;
  const std::size_t global_k = k_from_ratio(model.dim(), config.policy.max_ratio());

  TrainRun run;
  run.alphas = config.schedule.history(total);
  LayeredVector v = initial ? *initial : model.initial_params(config.seed);
  require_same_shape(v, LayeredVector(model.shape()));
  LayeredVector x = v;
  auto workers = make_workers(model, data, config.workers, config.seed);
  std::vector<LayeredVector> grads;

  double grad_norm_sum = 0.0;
  std::vector<std::optional<double>> pending_delta;
  std::optional<double> pending_grad_norm;

  auto make_record = [&](std::size_t t) {
    IterationRecord rec;
    rec.t = t;
    rec.loss = model.full_loss(v, data);
    rec.delta = std::move(pending_delta);
    pending_delta.clear();
    if (config.track_auxiliary) {
      LayeredVector gap = axpy(-1.0, x, v);
      rec.aux_gap_sq = gap.squared_norm();
      rec.identity_deviation = residual_identity_deviation(v, x, workers);
    }
    auto eps = mean_residual(workers);
    for (std::size_t l = 1; l <= eps.num_layers(); ++l) {
      rec.residual_norms.push_back(std::sqrt(eps.layer_squared_norm(l)));
    }
    rec.grad_norm_sq = pending_grad_norm;
    if (config.track_grad_norm && t > 0) {
      rec.avg_grad_norm_sq = grad_norm_sum / static_cast<double>(t);
    }
    if (config.iteration_time) rec.simulated_time = *config.iteration_time * static_cast<double>(t);
    return rec;
  };

  auto wants_delta = [&](std::size_t t) {
    return config.algorithm != Algorithm::kDense && config.delta_every > 0 &&
           t % config.delta_every == 0;
  };

  // Delta cells for the step taken from iterate t, evaluated on acc = eps + alpha G.
  auto evaluate_delta = [&](double alpha) {
    std::vector<std::optional<double>> cells;
    const std::size_t np = workers.size();
    auto account = [&](std::optional<double> d) {
      ++run.delta_cells;
      if (!d) {
        ++run.delta_undefined;
      } else if (*d > 1.0) {
        ++run.delta_violations;
      }
      cells.push_back(d);
    };
    if (config.algorithm == Algorithm::kSlgs) {
      std::vector<std::vector<double>> acc(np);
      for (std::size_t p = 0; p < np; ++p) {
        acc[p].assign(workers[p].residual.data().begin(), workers[p].residual.data().end());
        auto g = grads[p].data();
        for (std::size_t i = 0; i < acc[p].size(); ++i) acc[p][i] += alpha * g[i];
      }
      account(delta_metric(std::span<const std::vector<double>>(acc), global_k));
      return cells;
    }
    for (std::size_t l = model.shape().size(); l >= 1; --l) {
      const auto& s = model.shape()[l - 1];
      std::vector<std::vector<double>> acc(np);
      for (std::size_t p = 0; p < np; ++p) {
        auto eps = workers[p].residual.layer(l);
        auto g = grads[p].layer(l);
        acc[p].resize(s.dim);
        for (std::size_t i = 0; i < s.dim; ++i) acc[p][i] = eps[i] + alpha * g[i];
      }
      account(delta_metric(std::span<const std::vector<double>>(acc),
                           config.policy.k_for(s.layer_id, s.dim)));
    }
    // Stored in layer order 1..L.
    std::reverse(cells.begin(), cells.end());
    return cells;
  };

  try {
    run.initial_loss = model.full_loss(v, data);
    for (std::size_t t = 0; t < total; ++t) {
      const double alpha = run.alphas[t];
      const double batch_loss = compute_worker_gradients(model, data, v, workers, config.batch_size, grads);
      if (!std::isfinite(batch_loss) || std::abs(batch_loss) > kDivergenceThreshold) {
        throw NumericError("loss diverged", t);
      }
      {
        LayeredVector avg = scaled_sum(grads, 1.0 / static_cast<double>(grads.size()));
        run.max_avg_grad_sq = std::max(run.max_avg_grad_sq, avg.squared_norm());
      }
      if (config.track_grad_norm) pending_grad_norm = model.full_gradient(v, data).squared_norm();
      if (t % config.log_every == 0 || wants_delta(t)) {
        if (wants_delta(t)) pending_delta = evaluate_delta(alpha);
        run.records.push_back(make_record(t));
      }
      if (pending_grad_norm) grad_norm_sum += *pending_grad_norm;
      pending_grad_norm.reset();

      switch (config.algorithm) {
        case Algorithm::kDense:
          dense_step(v, grads, alpha);
          break;
        case Algorithm::kSlgs:
          slgs_step(v, workers, grads, alpha, global_k);
          break;
        case Algorithm::kLags:
          lags_step(v, workers, grads, alpha, config.policy);
          break;
      }
      if (config.track_auxiliary) {
        auxiliary_step(x, grads, alpha);
        run.max_identity_deviation =
            std::max(run.max_identity_deviation, residual_identity_deviation(v, x, workers));
      }
      if (!v.all_finite()) throw NumericError("parameters became non-finite", t);
      run.iterations_done = t + 1;
    }
    const double final_loss = model.full_loss(v, data);
    if (!std::isfinite(final_loss) || std::abs(final_loss) > kDivergenceThreshold) {
      throw NumericError("loss diverged", total);
    }
    run.records.push_back(make_record(total));
  } catch (const NumericError& e) {
    run.diverged = true;
    run.divergence_reason = std::string(e.what()) + " at iteration " + std::to_string(e.iteration());
  }

  run.params = std::move(v);
  run.auxiliary = std::move(x);
  run.mean_residual = mean_residual(workers);
  return run;
}

}  // namespace lags
