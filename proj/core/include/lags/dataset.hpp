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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lags/sparsifier.hpp"

namespace lags {

enum class DatasetKind { kGaussianClassification, kLinearRegression };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussianClassification;
  std::size_t samples = 1000;
  std::size_t features = 10;
  std::size_t classes = 2;
  // Norm of each class mean (classification).
  double separation = 2.0;
  // Std-dev of the additive target noise (regression).
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// In-memory synthetic dataset; regenerating from the same spec is bit-identical.
///
/// Classification: balanced labels, x = mu_label + N(0, I) with class means of
/// norm `separation`. Regression: x ~ N(0, I), y = w* . x + noise * N(0, 1).
class Dataset {
 public:
  static Dataset generate(const DatasetSpec& spec);

  /// A sample-free dataset for objectives that ignore data.
  static Dataset placeholder();

  const DatasetSpec& spec() const { return spec_; }
  std::size_t size() const { return spec_.samples; }
  std::size_t features() const { return spec_.features; }
  std::size_t classes() const { return spec_.classes; }
  bool is_classification() const { return spec_.kind == DatasetKind::kGaussianClassification; }

  std::span<const double> x(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * spec_.features, spec_.features);
  }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  double target(std::size_t i) const { return targets_[i]; }

  /// Sample indices owned by worker `worker` (0-based) of `workers`: i mod P == worker.
  std::vector<std::size_t> shard(std::size_t worker, std::size_t workers) const;

  std::vector<std::size_t> all_indices() const;

 private:
  DatasetSpec spec_;
  std::vector<double> features_;
  std::vector<std::size_t> labels_;
  std::vector<double> targets_;
};

/// Draws mini-batches from one worker's shard: without replacement within an
/// epoch, reshuffled at each epoch boundary.
class ShardSampler {
 public:
  ShardSampler(std::vector<std::size_t> shard, std::uint64_t seed);

  /// Returns min(batch_size, shard size) indices.
  std::vector<std::size_t> next(std::size_t batch_size);

  std::size_t shard_size() const { return shard_.size(); }

 private:
  void reshuffle();

  std::vector<std::size_t> shard_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

}  // namespace lags
