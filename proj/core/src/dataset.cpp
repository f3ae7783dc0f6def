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

#include "lags/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lags/errors.hpp"

namespace lags {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kGaussianClassification:
      return "gaussian-classification";
    case DatasetKind::kLinearRegression:
      return "linear-regression";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "gaussian-classification" || name == "synthetic-gaussian-classification") {
    return DatasetKind::kGaussianClassification;
  }
  if (name == "linear-regression" || name == "synthetic-linear-regression") {
    return DatasetKind::kLinearRegression;
  }
  throw ArgumentError("unknown dataset kind '" + std::string(name) + "'");
}

Dataset Dataset::generate(const DatasetSpec& spec) {
  if (spec.samples == 0) throw ArgumentError("dataset needs at least one sample");
  if (spec.features == 0) throw ArgumentError("dataset needs at least one feature");

  Dataset ds;
  ds.spec_ = spec;
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = spec.samples;
  const std::size_t f = spec.features;
  ds.features_.resize(n * f);

  if (spec.kind == DatasetKind::kGaussianClassification) {
    if (spec.classes < 2) throw ArgumentError("classification needs at least two classes");
    ds.targets_.assign(n, 0.0);
    std::vector<double> means(spec.classes * f);
    for (std::size_t c = 0; c < spec.classes; ++c) {
      double norm2 = 0.0;
      for (std::size_t j = 0; j < f; ++j) {
        double v = normal(rng);
        means[c * f + j] = v;
        norm2 += v * v;
      }
      double scale = norm2 > 0.0 ? spec.separation / std::sqrt(norm2) : 0.0;
      for (std::size_t j = 0; j < f; ++j) means[c * f + j] *= scale;
    }
    ds.labels_.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.labels_[i] = i % spec.classes;
    std::shuffle(ds.labels_.begin(), ds.labels_.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double* mu = &means[ds.labels_[i] * f];
      for (std::size_t j = 0; j < f; ++j) ds.features_[i * f + j] = mu[j] + normal(rng);
    }
  } else {
    ds.spec_.classes = 0;
    ds.labels_.assign(n, 0);
    ds.targets_.resize(n);
    std::vector<double> w(f);
    const double w_scale = 1.0 / std::sqrt(static_cast<double>(f));
    for (auto& v : w) v = w_scale * normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      double y = 0.0;
      for (std::size_t j = 0; j < f; ++j) {
        double v = normal(rng);
        ds.features_[i * f + j] = v;
        y += w[j] * v;
      }
      ds.targets_[i] = y + spec.noise * normal(rng);
    }
  }
  return ds;
}

Dataset Dataset::placeholder() {
  Dataset ds;
  ds.spec_.samples = 0;
  ds.spec_.features = 0;
  ds.spec_.classes = 0;
  return ds;
}

std::vector<std::size_t> Dataset::shard(std::size_t worker, std::size_t workers) const {
  if (workers == 0 || worker >= workers) throw IndexError("worker index out of range");
  std::vector<std::size_t> out;
  out.reserve(size() / workers + 1);
  for (std::size_t i = worker; i < size(); i += workers) out.push_back(i);
  return out;
}

std::vector<std::size_t> Dataset::all_indices() const {
  std::vector<std::size_t> out(size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

ShardSampler::ShardSampler(std::vector<std::size_t> shard, std::uint64_t seed)
    : shard_(std::move(shard)), order_(shard_), rng_(seed) {
  if (shard_.empty()) throw ArgumentError("worker shard is empty");
  reshuffle();
}

void ShardSampler::reshuffle() {
  order_ = shard_;
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

std::vector<std::size_t> ShardSampler::next(std::size_t batch_size) {
  if (batch_size == 0) throw ArgumentError("batch size must be positive");
  const std::size_t b = std::min(batch_size, shard_.size());
  if (order_.size() - cursor_ < b) reshuffle();
  std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + b));
  cursor_ += b;
  return batch;
}

}  // namespace lags
