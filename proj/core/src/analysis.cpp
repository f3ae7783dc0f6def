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

#include "lags/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lags/errors.hpp"

namespace lags {
namespace {

// max over u = 1..t of sum_{i=1..u} tau^i alpha_{u-i}^2 / alpha_u.
double stepsize_supremum(std::span<const double> alphas, std::size_t t, double tau) {
  double acc = 0.0;
  double best = 0.0;
  for (std::size_t u = 1; u <= t; ++u) {
    const double a_prev = alphas[u - 1];
    acc = tau * (a_prev * a_prev + acc);
    const double a_u = alphas[u];
    if (!(a_u > 0.0)) throw ArgumentError("step size must be positive at t = " + std::to_string(u));
    best = std::max(best, acc / a_u);
  }
  return best;
}

}  // namespace

std::optional<double> delta_metric(std::span<const std::span<const double>> local, std::size_t k) {
  if (local.empty()) throw ArgumentError("delta_metric needs at least one worker");
  const std::size_t d = local.front().size();
  for (const auto& x : local) {
    if (x.size() != d) throw StructuralError("worker vectors differ in length");
  }
  if (k < 1 || k > d) throw ArgumentError("k outside [1, d]");

  std::vector<double> aggregate(d, 0.0);
  std::vector<double> selected(d, 0.0);
  for (const auto& x : local) {
    for (std::size_t i = 0; i < d; ++i) aggregate[i] += x[i];
    scatter_add(top_k(x, k), selected);
  }
  const double total = squared_norm(aggregate);
  if (total == 0.0) return std::nullopt;
  if (k == d) return 0.0;

  double numerator = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double r = aggregate[i] - selected[i];
    numerator += r * r;
  }
  const double denominator = static_cast<double>(d - k) * total / static_cast<double>(d);
  return numerator / denominator;
}

std::optional<double> delta_metric(std::span<const std::vector<double>> local, std::size_t k) {
  std::vector<std::span<const double>> views(local.begin(), local.end());
  return delta_metric(std::span<const std::span<const double>>(views), k);
}

ContractionCheck contraction_check(std::span<const LayeredVector> vectors,
                                   const CompressionPolicy& policy) {
  if (vectors.empty()) throw ArgumentError("contraction_check needs at least one vector");
  const Shape& shape = vectors.front().shape();
  for (const auto& v : vectors) require_same_shape(vectors.front(), v);
  policy.validate_for(shape);

  LayeredVector aggregate(shape);
  LayeredVector selected(shape);
  for (const auto& v : vectors) {
    axpy_inplace(1.0, v, aggregate);
    for (const auto& s : shape) {
      const auto k = policy.k_for(s.layer_id, s.dim);
      scatter_add(top_k(v.layer(s.layer_id), k, s.layer_id), selected.layer(s.layer_id));
    }
  }
  ContractionCheck r;
  for (std::size_t i = 0; i < aggregate.size(); ++i) {
    const double e = aggregate[i] - selected[i];
    r.lhs += e * e;
  }
  const double c_max = policy.effective_c_max(shape);
  r.rhs = (1.0 - 1.0 / c_max) * aggregate.squared_norm();
  r.holds = r.lhs <= r.rhs + 1e-12 * r.rhs;
  return r;
}

double contraction_factor(double c_max, double eta) {
  if (!(c_max >= 1.0)) throw ArgumentError("c_max must be >= 1");
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  return (1.0 - 1.0 / c_max) * (1.0 + eta);
}

DriftBound drift_bound(std::span<const double> alpha_history, double c_max, double eta,
                       double m2, std::size_t t) {
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  if (t < 1) throw ArgumentError("t must be at least 1");
  if (alpha_history.size() < t) throw ArgumentError("alpha history shorter than t");
  DriftBound out;
  out.tau = contraction_factor(c_max, eta);
  out.divergent = out.tau >= 1.0;
  double sum = 0.0;
  double power = 1.0;
  for (std::size_t i = 1; i <= t; ++i) {
    power *= out.tau;
    const double a = alpha_history[t - i];
    sum += power * a * a;
  }
  out.bound = sum * m2 / eta;
  return out;
}

StepSizeCondition stepsize_condition(const StepSizeSchedule& schedule, double c_max, double eta,
                                     std::size_t horizon) {
  if (horizon < 1) throw ArgumentError("horizon must be at least 1");
  StepSizeCondition out;
  out.tau = contraction_factor(c_max, eta);
  out.bounded = out.tau < 1.0;
  auto alphas = schedule.history(horizon + 1);
  out.max_sum = stepsize_supremum(alphas, horizon, out.tau);
  const bool constant_in_t = schedule.kind == ScheduleKind::kConstant ||
                             schedule.kind == ScheduleKind::kInvSqrtT;
  if (constant_in_t && out.bounded) {
    const double a = schedule.at(0);
    out.constant_limit = a * out.tau / (1.0 - out.tau);
  }
  return out;
}

void BoundParams::validate() const {
  if (!(theta > 0.0)) throw ArgumentError("theta must be positive");
  if (!(smoothness > 0.0)) throw ArgumentError("smoothness constant must be positive");
  if (!(m2 >= 0.0)) throw ArgumentError("M^2 must be non-negative");
  if (!(c_max >= 1.0)) throw ArgumentError("c_max must be >= 1");
  if (!(eta_value() > 0.0)) throw ArgumentError("eta must be positive");
  if (!(gap >= 0.0)) throw ArgumentError("optimality gap must be non-negative");
}

double rate_bound(const BoundParams& p, std::size_t horizon) {
  p.validate();
  if (horizon < 1) throw ArgumentError("T must be at least 1");
  const double t = static_cast<double>(horizon);
  const double c = p.c_max;
  const double first = (4.0 * p.gap / p.theta + 2.0 * p.theta * p.smoothness * p.m2) / std::sqrt(t);
  const double second =
      4.0 * p.smoothness * p.smoothness * p.m2 * (c * c * c - c) * p.theta * p.theta / t;
  return first + second;
}

double weighted_rate_bound(std::span<const double> alphas, std::size_t t, const BoundParams& p) {
  p.validate();
  if (t < 1) throw ArgumentError("t must be at least 1");
  if (alphas.size() < t) throw ArgumentError("alpha history shorter than t");
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t s = 0; s < t; ++s) {
    s1 += alphas[s];
    s2 += alphas[s] * alphas[s];
  }
  const double eta = p.eta_value();
  const double tau = p.tau();
  // The supremum needs alpha_t for t = 1..t-1 only when t > 1.
  const double d = t > 1 ? stepsize_supremum(alphas, t - 1, tau) : 0.0;
  const double c = p.smoothness;
  return 4.0 * p.gap / s1 + 2.0 * (c + 2.0 * c * c * d / eta) * p.m2 * s2 / s1;
}

RateReport empirical_rate_check(const TrainRun& run, ModelKind model_kind,
                                const BoundParams& params) {
  RateReport report;
  report.hard = model_kind == ModelKind::kQuadratic;
  if (run.iterations_done == 0) return report;

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& rec : run.records) {
    if (rec.t == 0) continue;
    if (!rec.avg_grad_norm_sq) throw ArgumentError("run has no gradient-norm logs");
    RateCheckEntry e;
    e.t = rec.t;
    e.measured = *rec.avg_grad_norm_sq;
    e.bound = weighted_rate_bound(run.alphas, rec.t, params);
    const bool ok = e.measured <= e.bound;
    e.status = ok ? "pass" : (report.hard ? "fail" : "warn");
    if (!ok && report.hard) report.passed = false;
    if (e.measured > 0.0) {
      xs.push_back(std::log(static_cast<double>(e.t)));
      ys.push_back(std::log(e.measured));
    }
    report.entries.push_back(std::move(e));
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx > 0.0) report.log_log_slope = sxy / sxx;
  }
  return report;
}

nlohmann::json to_json(const ReportMetric& m) {
  nlohmann::json j{{"metric", m.name}, {"value", m.value}, {"status", m.status}};
  j["bound"] = m.bound ? nlohmann::json(*m.bound) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const RateReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"t", e.t}, {"measured", e.measured}, {"bound", e.bound},
                       {"status", e.status}});
  }
  nlohmann::json j{{"hard", r.hard}, {"passed", r.passed}, {"entries", std::move(entries)}};
  j["log_log_slope"] = r.log_log_slope ? nlohmann::json(*r.log_log_slope) : nlohmann::json(nullptr);
  return j;
}

}  // namespace lags
