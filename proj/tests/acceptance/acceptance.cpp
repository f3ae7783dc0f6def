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

// Acceptance checks. Each criterion prints one PASS/FAIL line; the process
// exits non-zero if any criterion fails. Tolerances and budgets are fixed here.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lags/analysis.hpp"
#include "lags/dataset.hpp"
#include "lags/experiment.hpp"
#include "lags/models.hpp"
#include "lags/optimizer.hpp"
#include "lags/perf.hpp"
#include "lags/sparsifier.hpp"

using namespace lags;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared setups

DatasetSpec mlp_data(std::uint64_t seed) {
  DatasetSpec d;
  d.samples = 4000;
  d.features = 64;
  d.classes = 4;
  d.separation = 3.0;
  d.seed = seed;
  return d;
}

ModelSpec mlp_model(std::uint64_t seed) {
  ModelSpec m;
  m.kind = ModelKind::kMlp;
  m.inputs = 64;
  m.hidden = {16};
  m.outputs = 4;
  m.seed = seed;
  return m;
}

ModelSpec quadratic_model(std::vector<std::size_t> dims, std::uint64_t seed) {
  ModelSpec m;
  m.kind = ModelKind::kQuadratic;
  m.layer_dims = std::move(dims);
  m.eigen_min = 0.1;
  m.eigen_max = 10.0;
  m.seed = seed;
  return m;
}

TrainerConfig trainer(Algorithm algo, double ratio, std::size_t layers, std::size_t workers,
                      std::size_t iterations, ScheduleKind kind, double theta, std::uint64_t seed) {
  TrainerConfig c;
  c.algorithm = algo;
  c.policy = CompressionPolicy::uniform(ratio, layers);
  c.workers = workers;
  c.iterations = iterations;
  c.schedule = {kind, theta, iterations};
  c.seed = seed;
  c.batch_size = 16;
  c.log_every = 10;
  c.delta_every = 0;
  return c;
}

std::string trace_bytes(const TrainRun& run) {
  std::string s;
  for (const auto& r : run.records) s += record_to_json(r).dump() + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// 1. Residual identity over a 500-iteration MLP run.

Verdict residual_identity() {
  auto model = make_model(mlp_model(1));
  auto data = Dataset::generate(mlp_data(2));
  auto cfg = trainer(Algorithm::kLags, 10, model->shape().size(), 8, 500, ScheduleKind::kConstant, 0.1, 1);
  cfg.log_every = 1;
  auto run = train(cfg, *model, data);
  double logged = 0.0;
  for (const auto& r : run.records) logged = std::max(logged, r.identity_deviation);
  const double worst = std::max(run.max_identity_deviation, logged);
  const bool ok = !run.diverged && run.iterations_done == 500 && worst <= 1e-9;
  return {ok, fmt("max ||v - x - mean eps||_inf = %.3g over %zu iterations (tol 1e-9)", worst,
                  run.iterations_done)};
}

// 2. LAGS with all ratios 1 reproduces dense traces byte for byte.

Verdict degeneracy() {
  struct Case {
    const char* name;
    ModelSpec model;
    std::optional<DatasetSpec> data;
    ScheduleKind kind;
    double theta;
  };
  DatasetSpec logistic_data;
  logistic_data.samples = 2000;
  logistic_data.features = 20;
  logistic_data.seed = 5;
  ModelSpec logistic;
  logistic.kind = ModelKind::kLogistic;
  logistic.inputs = 20;
  std::vector<Case> cases{
      {"mlp", mlp_model(3), mlp_data(4), ScheduleKind::kConstant, 0.1},
      {"logistic", logistic, logistic_data, ScheduleKind::kInvSqrtT, 5.0},
      {"quadratic", quadratic_model({40, 20, 10}, 3), std::nullopt, ScheduleKind::kInvSqrtT, 1.0},
  };
  std::string detail;
  bool ok = true;
  for (const auto& c : cases) {
    auto model = make_model(c.model);
    auto data = c.data ? Dataset::generate(*c.data) : Dataset::placeholder();
    const auto layers = model->shape().size();
    auto dense = train(trainer(Algorithm::kDense, 1, layers, 4, 300, c.kind, c.theta, 9), *model, data);
    auto lags = train(trainer(Algorithm::kLags, 1, layers, 4, 300, c.kind, c.theta, 9), *model, data);
    const bool same = trace_bytes(dense) == trace_bytes(lags) && dense.params == lags.params &&
                      !dense.records.empty();
    ok = ok && same;
    detail += fmt("%s%s %s", detail.empty() ? "" : ", ", c.name, same ? "identical" : "DIFFERENT");
  }
  return {ok, detail + " (300 iterations, P = 4)"};
}

// 3. top_k against brute force over every k-subset.

double unselected_sq(const std::vector<double>& x, std::uint32_t mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(mask & (1u << i))) s += x[i] * x[i];
  }
  return s;
}

Verdict topk_oracle() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> small(-3, 3);
  std::size_t checks = 0, mismatches = 0;
  for (std::size_t d = 1; d <= 12; ++d) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> x(d);
      // Even trials: continuous values. Odd trials: small integers, so ties and
      // zeros are common and every sum is exact.
      for (auto& v : x) v = trial % 2 == 0 ? normal(rng) : small(rng);
      for (std::size_t k = 1; k <= std::min<std::size_t>(6, d); ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
          if (static_cast<std::size_t>(std::popcount(mask)) == k) best = std::min(best, unselected_sq(x, mask));
        }
        std::uint32_t chosen = 0;
        for (const auto& e : top_k(x, k).entries) chosen |= 1u << e.index;
        ++checks;
        if (unselected_sq(x, chosen) != best) ++mismatches;
      }
    }
  }
  return {mismatches == 0,
          fmt("%zu mismatches in %zu (vector, k) checks, d <= 12, k <= 6", mismatches, checks)};
}

// 4. delta <= 1 for a single worker.

Verdict single_worker_delta() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  std::cauchy_distribution<double> heavy;
  std::uniform_int_distribution<int> small(-2, 2);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  std::size_t pairs = 0, violations = 0;
  double worst = 0.0;
  while (pairs < 10000) {
    const std::size_t d = dim(rng);
    std::vector<std::vector<double>> x(1, std::vector<double>(d));
    const int family = static_cast<int>(pairs % 4);
    for (auto& v : x[0]) {
      switch (family) {
        case 0: v = normal(rng); break;
        case 1: v = heavy(rng); break;
        case 2: v = small(rng); break;
        default: v = normal(rng) * (rng() % 3 == 0 ? 1.0 : 0.0); break;
      }
    }
    if (squared_norm(x[0]) == 0.0) continue;
    const std::size_t k = 1 + rng() % d;
    auto r = delta_metric(std::span<const std::vector<double>>(x), k);
    ++pairs;
    if (!r) continue;
    worst = std::max(worst, *r);
    if (*r > 1.0) ++violations;
  }
  return {violations == 0, fmt("%zu violations in %zu pairs, max delta %.17g", violations, pairs, worst)};
}

// 5. Fraction of (iteration, layer) cells with delta > 1 while training the MLP.

Verdict mlp_delta_fraction() {
  std::string detail;
  bool ok = true;
  for (std::size_t workers : {4, 8}) {
    auto model = make_model(mlp_model(7));
    auto data = Dataset::generate(mlp_data(8));
    auto cfg = trainer(Algorithm::kLags, 10, model->shape().size(), workers, 2000,
                       ScheduleKind::kConstant, 0.1, 7);
    cfg.delta_every = 1;
    cfg.log_every = 100;
    cfg.track_auxiliary = false;
    auto run = train(cfg, *model, data);
    const double frac = run.delta_violation_fraction();
    const bool pass = !run.diverged && run.delta_cells == 2000 * model->shape().size() && frac <= 0.01;
    ok = ok && pass;
    detail += fmt("%sP=%zu: %zu/%zu cells > 1 (%.3f%%)", detail.empty() ? "" : ", ", workers,
                  run.delta_violations, run.delta_cells - run.delta_undefined, 100 * frac);
  }
  return {ok, detail + " (tol 1%)"};
}

// 6. Logistic regression: LAGS close to dense, SLGS close to LAGS.

Verdict logistic_closeness() {
  DatasetSpec ds;
  ds.samples = 10000;
  ds.features = 200;
  ds.classes = 2;
  ds.separation = 2.0;
  ds.seed = 12;
  ModelSpec ms;
  ms.kind = ModelKind::kLogistic;
  ms.inputs = 200;
  ms.seed = 11;
  auto model = make_model(ms);
  auto data = Dataset::generate(ds);
  auto run_arm = [&](Algorithm algo, double ratio) {
    auto cfg = trainer(algo, ratio, model->shape().size(), 8, 5000, ScheduleKind::kInvSqrtT, 5.0, 11);
    cfg.batch_size = 32;
    cfg.log_every = 5000;
    cfg.track_auxiliary = false;
    auto run = train(cfg, *model, data);
    return run.diverged ? std::numeric_limits<double>::infinity() : run.final_loss();
  };
  const double dense = run_arm(Algorithm::kDense, 1);
  const double lags = run_arm(Algorithm::kLags, 10);
  const double slgs = run_arm(Algorithm::kSlgs, 10);
  const double lags_vs_dense = std::abs(lags - dense) / dense;
  const double slgs_vs_lags = std::abs(slgs - lags) / lags;
  const bool ok = lags_vs_dense <= 0.05 && slgs_vs_lags <= 0.05;
  return {ok, fmt("final loss dense %.6f, lags %.6f (%.3f%%), slgs %.6f (%.3f%% of lags); tol 5%%",
                  dense, lags, 100 * lags_vs_dense, slgs, 100 * slgs_vs_lags)};
}

// 7. Final quadratic loss is non-decreasing in the compression ratio.

Verdict compression_monotonicity() {
  const std::vector<double> ratios{1, 10, 100};
  std::size_t inversions = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto model = make_model(quadratic_model({48, 16}, seed));
    auto data = Dataset::placeholder();
    std::vector<double> finals;
    for (double c : ratios) {
      auto cfg = trainer(Algorithm::kLags, c, 2, 1, 2000, ScheduleKind::kInvSqrtT, 3.0, seed);
      cfg.log_every = 2000;
      cfg.track_auxiliary = false;
      auto run = train(cfg, *model, data);
      finals.push_back(run.diverged ? std::numeric_limits<double>::infinity() : run.final_loss());
    }
    for (std::size_t i = 1; i < finals.size(); ++i) {
      if (finals[i] < finals[i - 1] - 1e-10) ++inversions;
    }
    detail += fmt("%s[%.2g %.2g %.2g]", detail.empty() ? "" : " ", finals[0], finals[1], finals[2]);
  }
  return {inversions == 0,
          fmt("%zu inversions over 5 seeds (tol 1e-10); c = 1/10/100: ", inversions) + detail};
}

// 8. The dense quadratic rate stays below the closed-form bound.

Verdict quadratic_bound() {
  auto model = make_model(quadratic_model({64}, 5));
  const auto& q = static_cast<const QuadraticModel&>(*model);
  auto data = Dataset::placeholder();
  bool ok = true;
  std::string detail;
  for (std::size_t horizon : {100, 1000, 10000}) {
    auto cfg = trainer(Algorithm::kDense, 1, 1, 1, horizon, ScheduleKind::kInvSqrtT, 1.0, 5);
    cfg.log_every = horizon;
    cfg.track_grad_norm = true;
    auto run = train(cfg, q, data);
    BoundParams p;
    p.smoothness = q.smoothness();
    p.m2 = run.max_avg_grad_sq;
    p.c_max = 1.0;
    p.theta = 1.0;
    p.gap = run.initial_loss;  // f(x*) = 0
    const double bound = rate_bound(p, horizon);
    const auto& last = run.records.back();
    const double measured = last.avg_grad_norm_sq.value_or(std::numeric_limits<double>::infinity());
    const bool pass = !run.diverged && last.t == horizon && measured <= bound;
    ok = ok && pass;
    detail += fmt("%sT=%zu: %.4g <= %.4g", detail.empty() ? "" : ", ", horizon, measured, bound);
  }
  return {ok, detail};
}

// 9. Realized pipelining speedup never exceeds the bound.

Verdict pipelining_bound() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    PipelineScenario s;
    const std::size_t layers = 1 + rng() % 12;
    s.forward_time = trial % 5 == 0 ? 0.0 : unit(rng);
    for (std::size_t l = 0; l < layers; ++l) s.backward_times.push_back(0.01 + unit(rng));
    if (trial % 2 == 1) {
      for (std::size_t l = 0; l < layers; ++l) s.sparsify_times.push_back(0.2 * unit(rng));
    }
    if (trial % 3 == 0) {
      s.dims.resize(layers);
      for (auto& d : s.dims) d = 100 + rng() % 1000000;
      s.network = {1e-5 * unit(rng), 1e-8 * unit(rng), std::nullopt};
      s.workers = 2 + rng() % 31;
      std::map<std::uint32_t, double> ratios;
      for (std::size_t l = 1; l <= layers; ++l) ratios[static_cast<std::uint32_t>(l)] = 1 + 999 * unit(rng);
      s.policy = CompressionPolicy(ratios, 1000);
    } else {
      for (std::size_t l = 0; l < layers; ++l) s.comm_times.push_back(0.001 + 2 * unit(rng));
    }
    const double none = schedule(s, ScheduleMode::kNoOverlap).makespan;
    const double pipe = schedule(s, ScheduleMode::kPipelined).makespan;
    // Sparsification runs on the compute resource, so it counts as compute.
    const double bound = s_max(s.forward_time, s.total_backward() + s.total_sparsify(), s.total_comm());
    const double margin = none / pipe - bound;
    worst_margin = std::max(worst_margin, margin);
    if (margin > 1e-9) ++violations;
  }
  PipelineScenario hand;
  hand.backward_times = {1, 1};
  hand.comm_times = {1, 1};
  const double none = schedule(hand, ScheduleMode::kNoOverlap).makespan;
  const double pipe = schedule(hand, ScheduleMode::kPipelined).makespan;
  const bool hand_ok = none == 4.0 && pipe == 3.0;
  return {violations == 0 && hand_ok,
          fmt("%zu of 1000 scenarios exceed s_max + 1e-9 (max speedup - s_max = %.3g); "
              "two-layer makespans %g / %g",
              violations, worst_margin, none, pipe)};
}

// 10. Analytic gradients against central differences.

Verdict gradient_check() {
  DatasetSpec cls;
  cls.samples = 300;
  cls.features = 8;
  cls.classes = 3;
  cls.seed = 31;
  DatasetSpec reg = cls;
  reg.kind = DatasetKind::kLinearRegression;
  const auto cls_data = Dataset::generate(cls);
  const auto reg_data = Dataset::generate(reg);

  struct Kind {
    const char* name;
    ModelSpec spec;
    const Dataset* data;
  };
  ModelSpec logistic;
  logistic.kind = ModelKind::kLogistic;
  logistic.inputs = 8;
  logistic.outputs = 3;
  ModelSpec mlp = logistic;
  mlp.kind = ModelKind::kMlp;
  mlp.hidden = {10, 6};
  ModelSpec linear;
  linear.kind = ModelKind::kLinearRegression;
  linear.inputs = 8;
  const Dataset none = Dataset::placeholder();
  std::vector<Kind> kinds{{"quadratic", quadratic_model({10, 6}, 2), &none},
                          {"logistic", logistic, &cls_data},
                          {"mlp", mlp, &cls_data},
                          {"linear-regression", linear, &reg_data}};

  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> scale(0.5, 3.0);
  bool ok = true;
  std::string detail;
  for (const auto& k : kinds) {
    auto model = make_model(k.spec);
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
      auto p = model->initial_params(rng());
      const double s = scale(rng);
      for (auto& v : p.data()) v *= s;
      std::vector<std::size_t> batch;
      if (model->uses_data()) {
        const std::size_t n = 1 + rng() % 32;
        for (std::size_t i = 0; i < n; ++i) batch.push_back(rng() % k.data->size());
      }
      const auto g = model->gradient(p, *k.data, batch);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        const double h = 1e-3 * std::max(1.0, std::abs(orig));
        auto at = [&](double offset) {
          p[i] = orig + offset;
          return model->loss(p, *k.data, batch);
        };
        // Fourth-order central difference.
        const double fd = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
        p[i] = orig;
        // The floor only guards 0 / 0.
        const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-12});
        worst = std::max(worst, std::abs(fd - g[i]) / denom);
      }
    }
    ok = ok && worst <= 1e-5;
    detail += fmt("%s%s %.2g", detail.empty() ? "" : ", ", k.name, worst);
  }
  return {ok, "max relative error: " + detail + " (tol 1e-5, 50 draws each)"};
}

// 11. Closed-form bound values.

Verdict closed_forms() {
  BoundParams p;
  p.theta = 1;
  p.smoothness = 1;
  p.m2 = 1;
  p.gap = 1;
  p.c_max = 2;
  const double rhs = rate_bound(p, 100);
  const double alpha = 0.05;
  StepSizeSchedule constant{ScheduleKind::kConstant, alpha, 2000};
  const auto cond = stepsize_condition(constant, 2.0, 0.5, 2000);
  const double tau = contraction_factor(2.0, 0.5);
  const double limit = alpha * tau / (1 - tau);
  const double rel = std::abs(cond.max_sum - limit) / limit;
  const bool ok = std::abs(rhs - 0.84) <= 1e-12 && rel <= 1e-12 && cond.constant_limit &&
                  std::abs(*cond.constant_limit - limit) <= 1e-12 * limit;
  return {ok, fmt("rhs = %.15g (0.84 +- 1e-12); step-size sup %.15g vs alpha tau/(1-tau) = %.15g, "
                  "rel err %.2g (tol 1e-12)",
                  rhs, cond.max_sum, limit, rel)};
}

// 12. Hand-built input that breaks the single-worker guarantee.

Verdict adversarial_delta() {
  std::vector<std::vector<double>> local{{1, 0}, {-1, 0.5}};
  const auto d = delta_metric(std::span<const std::vector<double>>(local), 1);
  std::vector<std::vector<double>> a{{1, 0}, {1, 0}}, b{{-1, 0.5}, {-1, 0.5}};
  std::vector<LayeredVector> layered{concat(a), concat(b)};
  const auto check = contraction_check(layered, CompressionPolicy::uniform(2, 2));
  const bool ok = d && std::abs(*d - 2.0) <= 1e-12 && !check.holds;
  return {ok, fmt("delta = %.15g (2 +- 1e-12); two-layer contraction check lhs %.3g > rhs %.3g, holds = %s",
                  d.value_or(std::nan("")), check.lhs, check.rhs, check.holds ? "true" : "false")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "residual identity", 30, residual_identity},
      {2, "lossless LAGS equals dense", 10, degeneracy},
      {3, "top-k brute-force oracle", 60, topk_oracle},
      {4, "single-worker delta <= 1", 30, single_worker_delta},
      {5, "MLP delta > 1 fraction", 300, mlp_delta_fraction},
      {6, "logistic convergence closeness", 180, logistic_closeness},
      {7, "compression monotonicity", 60, compression_monotonicity},
      {8, "quadratic rate bound", 120, quadratic_bound},
      {9, "pipelining speedup bound", 10, pipelining_bound},
      {10, "finite-difference gradients", 30, gradient_check},
      {11, "closed-form bound values", 1, closed_forms},
      {12, "adversarial delta", 1, adversarial_delta},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = v.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s C%-2d %-32s %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
