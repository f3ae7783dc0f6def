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

#include <benchmark/benchmark.h>

#include <random>

#include "lags/dataset.hpp"
#include "lags/models.hpp"
#include "lags/optimizer.hpp"
#include "lags/perf.hpp"

namespace {

void BM_LagsStep(benchmark::State& state) {
  const auto workers = static_cast<std::size_t>(state.range(0));
  lags::DatasetSpec ds;
  ds.samples = 4000;
  ds.features = 64;
  ds.classes = 4;
  lags::ModelSpec ms;
  ms.kind = lags::ModelKind::kMlp;
  ms.inputs = 64;
  ms.hidden = {16};
  ms.outputs = 4;
  auto model = lags::make_model(ms);
  auto data = lags::Dataset::generate(ds);
  auto v = model->initial_params(0);
  auto ws = lags::make_workers(*model, data, workers, 0);
  std::vector<lags::LayeredVector> grads;
  const auto policy = lags::CompressionPolicy::uniform(10, model->shape().size());
  for (auto _ : state) {
    lags::compute_worker_gradients(*model, data, v, ws, 16, grads);
    benchmark::DoNotOptimize(lags::lags_step(v, ws, grads, 0.01, policy));
  }
}

void BM_PipelinedSchedule(benchmark::State& state) {
  const auto layers = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  lags::PipelineScenario s;
  s.forward_time = u(rng);
  for (std::size_t l = 0; l < layers; ++l) {
    s.backward_times.push_back(u(rng));
    s.sparsify_times.push_back(0.1 * u(rng));
    s.comm_times.push_back(u(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(lags::schedule(s, lags::ScheduleMode::kPipelined));
}

}  // namespace

BENCHMARK(BM_LagsStep)->Arg(4)->Arg(8);
BENCHMARK(BM_PipelinedSchedule)->Arg(10)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
