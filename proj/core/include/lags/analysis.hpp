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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lags/layered_vector.hpp"
#include "lags/models.hpp"
#include "lags/optimizer.hpp"
#include "lags/sparsifier.hpp"

namespace lags {

// ---------------------------------------------------------------------------
// Aggregated top-k versus rand-k

/// delta = ||sum_p x^p - sum_p topk(x^p, k)||^2 / ((1 - k/d) ||sum_p x^p||^2).
///
/// The denominator is the exact expectation of the rand-k residual on the
/// aggregate, so the value is deterministic. Returns nullopt when the
/// aggregate is zero. When k == d both sides vanish and the result is 0.
std::optional<double> delta_metric(std::span<const std::span<const double>> local, std::size_t k);
std::optional<double> delta_metric(std::span<const std::vector<double>> local, std::size_t k);

struct ContractionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

/// Compares the layer-wise aggregated top-k residual with
/// (1 - 1/c_max) ||sum_p x^p||^2, where c_max is the realized max of d(l)/k(l).
/// Holds within a 1e-12 relative slack. Guaranteed only under the
/// aggregation assumption (always for P = 1); reported, never asserted.
ContractionCheck contraction_check(std::span<const LayeredVector> vectors,
                                   const CompressionPolicy& policy);

// ---------------------------------------------------------------------------
// Bound calculators

/// tau = (1 - 1/c_max)(1 + eta).
double contraction_factor(double c_max, double eta);

struct DriftBound {
  double bound = 0.0;
  double tau = 0.0;
  // Set when tau >= 1: the sum is still evaluated but grows with t.
  bool divergent = false;
};

/// (1/eta) sum_{i=1..t} tau^i alpha_{t-i}^2 M^2, a bound on E||v_t - x_t||^2.
/// alpha_history[s] is the step size used at iteration s.
DriftBound drift_bound(std::span<const double> alpha_history, double c_max, double eta,
                       double m2, std::size_t t);

struct StepSizeCondition {
  // max over t = 1..T of sum_{i=1..t} tau^i alpha_{t-i}^2 / alpha_t.
  double max_sum = 0.0;
  double tau = 0.0;
  // tau < 1, so a finite D exists for constant and diminishing schedules.
  bool bounded = false;
  // alpha tau / (1 - tau) for schedules that are constant in t.
  std::optional<double> constant_limit;
};

StepSizeCondition stepsize_condition(const StepSizeSchedule& schedule, double c_max, double eta,
                                     std::size_t horizon);

struct BoundParams {
  double smoothness = 1.0;  // C
  double m2 = 1.0;          // M^2
  double c_max = 1.0;
  double theta = 1.0;
  // Defaults to 1 / c_max when unset.
  std::optional<double> eta;
  double gap = 0.0;  // f(x0) - f(x*)

  double eta_value() const { return eta.value_or(1.0 / c_max); }
  double tau() const { return contraction_factor(c_max, eta_value()); }
  void validate() const;
};

/// [4 gap / theta + 2 theta C M^2] / sqrt(T) + 4 C^2 M^2 (c^3 - c) theta^2 / T.
double rate_bound(const BoundParams& params, std::size_t horizon);

/// General weighted bound for the first t iterations of an arbitrary
/// schedule: 4 gap / S1 + 2 (C + 2 C^2 D / eta) M^2 S2 / S1 with
/// S1 = sum alpha, S2 = sum alpha^2 and D the step-size condition supremum.
double weighted_rate_bound(std::span<const double> alphas, std::size_t t, const BoundParams& params);

struct RateCheckEntry {
  std::size_t t = 0;
  double measured = 0.0;
  double bound = 0.0;
  std::string status;
};

struct RateReport {
  std::vector<RateCheckEntry> entries;
  // Least-squares slope of log(measured) against log(t).
  std::optional<double> log_log_slope;
  bool hard = false;
  bool passed = true;
};

/// Compares the running average of ||grad f(v_t)||^2 with the step-size bound
/// at every logged checkpoint. Hard (status "fail" on violation) only for the
/// quadratic model; otherwise violations are "warn".
RateReport empirical_rate_check(const TrainRun& run, ModelKind model_kind,
                                const BoundParams& params);

// ---------------------------------------------------------------------------
// Report rows

struct ReportMetric {
  std::string name;
  double value = 0.0;
  std::optional<double> bound;
  std::string status;  // pass | warn | fail | n/a
};

nlohmann::json to_json(const ReportMetric& metric);
nlohmann::json to_json(const RateReport& report);

}  // namespace lags
