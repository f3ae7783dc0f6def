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
#include <vector>

#include "lags/sparsifier.hpp"

namespace {

template <typename T>
std::vector<T> gaussian(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<T> x(n);
  for (auto& v : x) v = static_cast<T>(g(rng));
  return x;
}

template <typename T>
void BM_TopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian<T>(n);
  const std::size_t k = lags::k_from_ratio(n, 100);
  for (auto _ : state) benchmark::DoNotOptimize(lags::top_k(std::span<const T>(x), k));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <typename T>
void BM_SampledTopK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian<T>(n);
  const std::size_t k = lags::k_from_ratio(n, 100);
  lags::Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(lags::sampled_top_k(std::span<const T>(x), k, 0.01, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_RandK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian<double>(n);
  lags::Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(lags::rand_k(x, n / 100, rng));
}

}  // namespace

BENCHMARK(BM_TopK<double>)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_TopK<float>)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_SampledTopK<double>)->RangeMultiplier(10)->Range(10000, 1000000);
BENCHMARK(BM_SampledTopK<float>)->RangeMultiplier(10)->Range(10000, 1000000);
BENCHMARK(BM_RandK)->Arg(100000);
