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

#include "lags/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "lags/analysis.hpp"
#include "lags/byte_io.hpp"
#include "lags/errors.hpp"
#include "lags/snapshot.hpp"

namespace lags {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string hex_digest(std::span<const std::uint8_t> bytes) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << byte_io::fnv1a64(bytes);
  return os.str();
}

std::string text_bytes_digest(const std::string& text) {
  return hex_digest(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string format_double(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

json policy_json(const CompressionPolicy& policy) {
  json ratios = json::object();
  for (const auto& [id, c] : policy.ratios()) ratios[std::to_string(id)] = c;
  return ratios;
}

json trainer_json(const TrainerConfig& t) {
  return {{"algorithm", std::string(to_string(t.algorithm))},
          {"workers", t.workers},
          {"iterations", t.iterations},
          {"batch_size", t.batch_size},
          {"schedule", std::string(to_string(t.schedule.kind))},
          {"theta", t.schedule.theta},
          {"seed", t.seed},
          {"log_every", t.log_every},
          {"delta_every", t.delta_every},
          {"ratios", policy_json(t.policy)}};
}

// Bound calculators for one arm; only the quadratic has a known smoothness constant.
json bounds_json(const ExperimentConfig& config, const ArmSpec& arm, const Model& model,
                 const Dataset& data, const TrainRun& run, bool& hard_failure) {
  if (model.kind() != ModelKind::kQuadratic) {
    return {{"status", "n/a"}, {"reason", "smoothness constant unknown for this model"}};
  }
  const auto& quad = static_cast<const QuadraticModel&>(model);
  const auto& t = arm.trainer;
  BoundParams params;
  params.smoothness = quad.smoothness();
  params.c_max = t.policy.effective_c_max(model.shape());
  params.theta = t.schedule.theta;
  params.gap = config.analysis.gap.value_or(run.initial_loss);
  std::vector<LayeredVector> trace{model.initial_params(t.seed), run.params};
  params.m2 = std::max(run.max_avg_grad_sq,
                       second_moment_estimate(model, trace, data, t.workers, t.batch_size,
                                              config.analysis.m2_draws, t.seed));

  json out{{"smoothness", params.smoothness},
           {"m2", params.m2},
           {"c_max", params.c_max},
           {"eta", params.eta_value()},
           {"gap", params.gap}};
  const auto cond = stepsize_condition(t.schedule, params.c_max, params.eta_value(), t.iterations);
  out["stepsize_condition"] = {{"max_sum", cond.max_sum},
                               {"tau", cond.tau},
                               {"bounded", cond.bounded},
                               {"constant_limit", optional_json(cond.constant_limit)}};
  if (t.schedule.kind == ScheduleKind::kInvSqrtT) {
    out["rate_bound"] = rate_bound(params, t.iterations);
  }
  if (t.track_auxiliary && !run.records.empty() && run.iterations_done > 0) {
    const auto drift = drift_bound(run.alphas, params.c_max, params.eta_value(), params.m2,
                                        run.iterations_done);
    const double measured = run.records.back().aux_gap_sq;
    ReportMetric m{"aux_gap_sq", measured, drift.bound, measured <= drift.bound ? "pass" : "warn"};
    out["drift"] = to_json(m);
  }
  if (t.track_grad_norm) {
    const auto report = empirical_rate_check(run, model.kind(), params);
    if (!report.passed) hard_failure = true;
    out["rate_check"] = to_json(report);
  }
  return out;
}

struct ArmFiles {
  std::string metrics;
  std::vector<std::uint8_t> checkpoint;
  std::vector<std::uint8_t> auxiliary;
  std::vector<std::uint8_t> residual;
};

std::string read_text(const fs::path& path) {
  try {
    auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
  } catch (const std::exception&) {
    throw IntegrityError(path.filename().string(), "missing or unreadable");
  }
}

PipelineScenario scenario_for_arm(const ScenarioFile& file, const ArmSpec& arm) {
  PipelineScenario s = file.scenario;
  if (s.comm_times.empty() && s.num_layers() == arm.trainer.policy.ratios().size()) {
    s.policy = arm.trainer.policy;
  }
  return s;
}

}  // namespace

json record_to_json(const IterationRecord& r) {
  json delta = json::array();
  for (const auto& d : r.delta) delta.push_back(optional_json(d));
  return {{"t", r.t},
          {"loss", r.loss},
          {"delta", std::move(delta)},
          {"aux_gap_sq", r.aux_gap_sq},
          {"identity_deviation", r.identity_deviation},
          {"residual_norms", r.residual_norms},
          {"grad_norm_sq", optional_json(r.grad_norm_sq)},
          {"avg_grad_norm_sq", optional_json(r.avg_grad_norm_sq)},
          {"simulated_time", optional_json(r.simulated_time)}};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.output = config.output;
  const auto started = std::chrono::system_clock::now();

  auto model = make_model(config.model);
  const Dataset data =
      config.dataset ? Dataset::generate(*config.dataset) : Dataset::placeholder();

  std::optional<ScenarioFile> scenario;
  if (config.perf_scenario) scenario = load_scenario(config.perf_scenario->string());

  fs::create_directories(config.output);
  for (const auto& spec : config.arms) {
    ArmSpec arm = spec;
    if (model->kind() == ModelKind::kQuadratic && config.analysis.bounds) {
      arm.trainer.track_grad_norm = true;
    }
    if (scenario) {
      const auto mode = arm.trainer.algorithm == Algorithm::kLags ? ScheduleMode::kPipelined
                                                                   : ScheduleMode::kNoOverlap;
      arm.trainer.iteration_time = schedule(scenario_for_arm(*scenario, arm), mode).makespan;
    }

    ArmOutcome outcome;
    outcome.name = arm.name;
    outcome.algorithm = arm.trainer.algorithm;
    outcome.run = train(arm.trainer, *model, data);
    const TrainRun& run = outcome.run;

    const fs::path dir = config.output / arm.name;
    fs::create_directories(dir);
    ArmFiles files;
    for (const auto& rec : run.records) files.metrics += record_to_json(rec).dump() + "\n";
    files.checkpoint = encode_snapshot(run.params);
    write_file_atomic(dir / "metrics.jsonl", files.metrics);
    write_file_atomic(dir / "checkpoint.bin", files.checkpoint);
    write_file_atomic(dir / "residual_mean.bin", encode_snapshot(run.mean_residual));
    files.residual = encode_snapshot(run.mean_residual);
    if (arm.trainer.track_auxiliary) {
      files.auxiliary = encode_snapshot(run.auxiliary);
      write_file_atomic(dir / "auxiliary.bin", files.auxiliary);
    }

    bool hard_failure = false;
    json analysis;
    analysis["arm"] = arm.name;
    analysis["config"] = trainer_json(arm.trainer);
    analysis["model"] = std::string(to_string(model->kind()));
    analysis["dim"] = model->dim();
    analysis["initial_loss"] = run.initial_loss;
    analysis["final_loss"] = run.final_loss();
    analysis["iterations_done"] = run.iterations_done;
    analysis["diverged"] = run.diverged;
    analysis["divergence_reason"] = run.divergence_reason;
    analysis["max_identity_deviation"] =
        arm.trainer.track_auxiliary ? json(run.max_identity_deviation) : json(nullptr);
    analysis["effective_c_max"] = arm.trainer.policy.effective_c_max(model->shape());
    if (arm.trainer.algorithm == Algorithm::kDense || arm.trainer.delta_every == 0) {
      analysis["delta"] = {{"status", "n/a"}};
    } else {
      analysis["delta"] = {{"cells", run.delta_cells},
                           {"violations", run.delta_violations},
                           {"undefined", run.delta_undefined},
                           {"violation_fraction", run.delta_violation_fraction()}};
    }
    if (config.analysis.bounds && !run.diverged) {
      analysis["bounds"] = bounds_json(config, arm, *model, data, run, hard_failure);
    }
    json artifacts{{"metrics.jsonl", text_bytes_digest(files.metrics)},
                   {"checkpoint.bin", hex_digest(files.checkpoint)},
                   {"residual_mean.bin", hex_digest(files.residual)}};
    if (arm.trainer.track_auxiliary) artifacts["auxiliary.bin"] = hex_digest(files.auxiliary);
    analysis["artifacts"] = artifacts;

    const bool identity_bad =
        arm.trainer.track_auxiliary && !(run.max_identity_deviation <= kIdentityTolerance);
    outcome.failed = run.diverged || identity_bad || hard_failure;
    analysis["status"] = outcome.failed ? "fail" : "pass";
    write_file_atomic(dir / "analysis.json", analysis.dump(2) + "\n");
    outcome.analysis = std::move(analysis);
    if (outcome.failed) result.exit_code = 1;
    result.arms.push_back(std::move(outcome));
  }

  std::ostringstream summary;
  summary << std::left << std::setw(16) << "arm" << std::setw(8) << "algo" << std::setw(16)
          << "final_loss" << std::setw(12) << "delta>1" << std::setw(14) << "identity_dev"
          << "status\n";
  for (const auto& arm : result.arms) {
    const auto& d = arm.analysis["delta"];
    const std::string delta =
        d.contains("violation_fraction") ? format_double(d["violation_fraction"].get<double>(), 4)
                                         : "n/a";
    const auto& dev = arm.analysis["max_identity_deviation"];
    summary << std::left << std::setw(16) << arm.name << std::setw(8)
            << std::string(to_string(arm.algorithm)) << std::setw(16)
            << format_double(arm.run.final_loss(), 8) << std::setw(12) << delta << std::setw(14)
            << (dev.is_null() ? std::string("n/a") : format_double(dev.get<double>(), 3))
            << (arm.run.diverged ? "diverged" : (arm.failed ? "fail" : "ok")) << "\n";
  }
  result.summary = summary.str();
  write_file_atomic(config.output / "summary.txt", result.summary);

  if (scenario) {
    write_file_atomic(config.output / "timeline.csv",
                      timeline_csv(schedule(scenario->scenario, ScheduleMode::kPipelined)));
  }

  const auto finished = std::chrono::system_clock::now();
  auto iso = [](std::chrono::system_clock::time_point tp) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  };
  json manifest{{"version", kVersion},
                {"seed", config.seed},
                {"started", iso(started)},
                {"finished", iso(finished)},
                {"arms", json::array()},
                {"exit_code", result.exit_code}};
  for (const auto& arm : result.arms) manifest["arms"].push_back(arm.name);
  write_file_atomic(config.output / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

ExperimentResult run_experiment(const fs::path& config_path, const RunOverrides& overrides) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (overrides.seed) config.apply_seed(*overrides.seed);
  if (overrides.output) config.output = *overrides.output;
  return run_experiment(config);
}

json PerfReport::to_json() const {
  json events = json::array();
  for (const auto& e : timeline.timeline) {
    events.push_back({{"event", e.event}, {"resource", e.resource}, {"start", e.start},
                      {"end", e.end}});
  }
  return {{"no_overlap_makespan", no_overlap},
          {"pipelined_makespan", pipelined},
          {"speedup", speedup},
          {"s_max", s_max},
          {"t_f", t_f},
          {"t_b", t_b},
          {"t_spar", t_spar},
          {"t_c", t_c},
          {"ratios", policy_json(selected)},
          {"ratios_source", ratios_selected ? "selected" : "configured"},
          {"timeline", std::move(events)}};
}

std::string PerfReport::text() const {
  std::ostringstream os;
  os << "no-overlap makespan  " << format_double(no_overlap, 9) << " s\n"
     << "pipelined makespan   " << format_double(pipelined, 9) << " s\n"
     << "speedup              " << format_double(speedup, 6) << "\n"
     << "s_max bound          " << format_double(s_max, 6) << "\n"
     << (ratios_selected ? "selected ratios     " : "configured ratios   ");
  for (const auto& [id, c] : selected.ratios()) os << " " << id << ":" << c;
  os << "\n";
  return os.str();
}

PerfReport run_perf(const ScenarioFile& file) {
  const auto& s = file.scenario;
  PerfReport r;
  r.no_overlap = schedule(s, ScheduleMode::kNoOverlap).makespan;
  r.timeline = schedule(s, ScheduleMode::kPipelined);
  r.pipelined = r.timeline.makespan;
  r.speedup = r.pipelined > 0.0 ? r.no_overlap / r.pipelined : 1.0;
  r.t_f = s.forward_time;
  r.t_b = s.total_backward();
  r.t_spar = s.total_sparsify();
  r.t_c = s.total_comm();
  r.s_max = r.t_c > 0.0 ? lags::s_max(r.t_f, r.t_b + r.t_spar, r.t_c) : 1.0;
  if (s.comm_times.empty()) {
    r.selected = select_ratios(s, file.ratio_cap, file.grid);
    r.ratios_selected = true;
  } else {
    r.selected = s.policy;
  }
  return r;
}

PerfReport run_perf(const fs::path& scenario_path, const std::optional<fs::path>& out_dir) {
  const PerfReport r = run_perf(load_scenario(scenario_path.string()));
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_file_atomic(*out_dir / "perf.json", r.to_json().dump(2) + "\n");
    write_file_atomic(*out_dir / "timeline.csv", timeline_csv(r.timeline));
  }
  return r;
}

bool VerifyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const VerifyCheck& c) { return c.status == "fail"; });
}

std::string VerifyReport::text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << std::left << std::setw(5) << c.status << std::setw(16) << c.arm << std::setw(20)
       << c.name << c.detail << "\n";
  }
  os << (passed() ? "verify: pass" : "verify: FAIL") << "\n";
  return os.str();
}

VerifyReport verify_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IntegrityError(dir.string(), "not a run directory");
  std::vector<fs::path> arm_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "analysis.json")) {
      arm_dirs.push_back(entry.path());
    }
  }
  std::sort(arm_dirs.begin(), arm_dirs.end());
  if (arm_dirs.empty()) throw IntegrityError(dir.string(), "no arm directories with analysis.json");

  VerifyReport report;
  struct Trace {
    std::string name;
    json config;
    std::vector<double> losses;
  };
  std::vector<Trace> traces;

  for (const auto& arm_dir : arm_dirs) {
    const std::string arm = arm_dir.filename().string();
    auto rel = [&](const char* file) { return (fs::path(arm) / file).string(); };
    json analysis;
    try {
      analysis = json::parse(read_text(arm_dir / "analysis.json"));
      (void)analysis.at("artifacts").at("checkpoint.bin").get<std::string>();
      (void)analysis.at("config").at("algorithm").get<std::string>();
    } catch (const json::exception&) {
      throw IntegrityError(rel("analysis.json"), "malformed");
    }
    const auto& artifacts = analysis["artifacts"];

    std::map<std::string, std::vector<std::uint8_t>> blobs;
    for (const auto& [file, digest] : artifacts.items()) {
      std::vector<std::uint8_t> bytes;
      try {
        bytes = read_file_bytes(arm_dir / file);
      } catch (const std::exception&) {
        throw IntegrityError(rel(file.c_str()), "missing or unreadable");
      }
      if (hex_digest(bytes) != digest.get<std::string>()) {
        throw IntegrityError(rel(file.c_str()), "content does not match the recorded digest");
      }
      blobs[file] = std::move(bytes);
    }
    if (!blobs.count("metrics.jsonl")) throw IntegrityError(rel("metrics.jsonl"), "not recorded");
    auto snapshot = [&](const std::string& file) {
      try {
        return decode_snapshot(blobs.at(file));
      } catch (const IntegrityError& e) {
        throw IntegrityError(rel(file.c_str()), e.what());
      }
    };
    report.checks.push_back({arm, "artifacts", "pass", std::to_string(blobs.size()) + " files"});

    // Metrics.
    std::vector<json> records;
    {
      const auto& bytes = blobs["metrics.jsonl"];
      std::istringstream in(std::string(bytes.begin(), bytes.end()));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          records.push_back(json::parse(line));
        } catch (const json::exception&) {
          throw IntegrityError(rel("metrics.jsonl"), "malformed record");
        }
      }
    }
    Trace trace{arm, analysis["config"], {}};
    double max_logged_dev = 0.0;
    std::size_t cells = 0;
    std::size_t violations = 0;
    std::size_t undefined = 0;
    try {
      for (const auto& r : records) {
        trace.losses.push_back(r.at("loss").get<double>());
        max_logged_dev = std::max(max_logged_dev, r.at("identity_deviation").get<double>());
        for (const auto& d : r.at("delta")) {
          ++cells;
          if (d.is_null()) {
            ++undefined;
          } else if (d.get<double>() > 1.0) {
            ++violations;
          }
        }
      }
    } catch (const json::exception&) {
      throw IntegrityError(rel("metrics.jsonl"), "record is missing fields");
    }

    // Residual identity on the stored final state.
    if (blobs.count("auxiliary.bin")) {
      const LayeredVector v = snapshot("checkpoint.bin");
      const LayeredVector x = snapshot("auxiliary.bin");
      const LayeredVector eps = snapshot("residual_mean.bin");
      if (v.shape() != x.shape() || v.shape() != eps.shape()) {
        throw IntegrityError(rel("auxiliary.bin"), "shape differs from checkpoint.bin");
      }
      double dev = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dev = std::max(dev, std::abs(v[i] - x[i] - eps[i]));
      const double worst = std::max(dev, max_logged_dev);
      report.checks.push_back({arm, "residual_identity",
                               worst <= kIdentityTolerance ? "pass" : "fail",
                               "max deviation " + format_double(worst, 3)});
    } else {
      report.checks.push_back({arm, "residual_identity", "n/a", "auxiliary sequence not tracked"});
    }

    // Delta statistics.
    const auto& delta = analysis["delta"];
    if (!delta.contains("cells")) {
      report.checks.push_back({arm, "delta", "n/a", "no sparsification"});
    } else {
      const bool match = delta["cells"].get<std::size_t>() == cells &&
                         delta["violations"].get<std::size_t>() == violations &&
                         delta["undefined"].get<std::size_t>() == undefined;
      const double fraction =
          cells > undefined ? static_cast<double>(violations) / static_cast<double>(cells - undefined)
                            : 0.0;
      report.checks.push_back({arm, "delta", match ? "pass" : "fail",
                               std::to_string(violations) + "/" + std::to_string(cells) +
                                   " cells > 1 (fraction " + format_double(fraction, 4) + ")"});
    }

    const bool diverged = analysis.value("diverged", false);
    report.checks.push_back({arm, "finished", diverged ? "fail" : "pass",
                             diverged ? analysis.value("divergence_reason", std::string()) : ""});
    traces.push_back(std::move(trace));
  }

  // Degeneracy: a sparsified arm with every ratio 1 must repeat a matching dense arm exactly.
  auto same_setup = [](const json& a, const json& b) {
    for (const char* key : {"workers", "iterations", "batch_size", "schedule", "theta", "seed",
                            "log_every"}) {
      if (a.at(key) != b.at(key)) return false;
    }
    return true;
  };
  auto lossless = [](const json& cfg) {
    for (const auto& [id, c] : cfg.at("ratios").items()) {
      if (c.get<double>() != 1.0) return false;
    }
    return true;
  };
  bool any_pair = false;
  for (const auto& dense : traces) {
    if (dense.config.at("algorithm") != "dense") continue;
    for (const auto& other : traces) {
      if (other.config.at("algorithm") != "lags" || !lossless(other.config) ||
          !same_setup(dense.config, other.config)) {
        continue;
      }
      any_pair = true;
      const bool same = dense.losses == other.losses;
      report.checks.push_back({other.name, "degeneracy", same ? "pass" : "fail",
                               "loss trace vs " + dense.name +
                                   (same ? " identical" : " differs")});
    }
  }
  if (!any_pair) report.checks.push_back({"*", "degeneracy", "n/a", "no dense / lossless pair"});
  return report;
}

}  // namespace lags
