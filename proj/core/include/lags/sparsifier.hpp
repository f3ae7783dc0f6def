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
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "lags/layered_vector.hpp"

namespace lags {

using Rng = std::mt19937_64;

template <typename T>
struct BasicSparseEntry {
  std::uint32_t index = 0;
  T value{};

  friend bool operator==(const BasicSparseEntry&, const BasicSparseEntry&) = default;
};

/// Selected entries of one layer. Indices are strictly increasing and < dim.
template <typename T>
struct BasicSparseChunk {
  std::uint32_t layer_id = 0;
  std::uint32_t dim = 0;
  std::vector<BasicSparseEntry<T>> entries;
  std::size_t k_target = 0;

  /// Bytes this chunk occupies in a fusion buffer.
  std::size_t byte_size() const { return 8 + entries.size() * (4 + sizeof(T)); }

  friend bool operator==(const BasicSparseChunk&, const BasicSparseChunk&) = default;
};

using SparseEntry = BasicSparseEntry<double>;
using SparseChunk = BasicSparseChunk<double>;
using SparseChunkF32 = BasicSparseChunk<float>;

// Exact top-k by magnitude. Selects min(k, nnz(x)) entries; equal magnitudes
// resolve to the lower index. Zeros are never selected.
SparseChunk top_k(std::span<const double> x, std::size_t k, std::uint32_t layer_id = 0);
SparseChunkF32 top_k(std::span<const float> x, std::size_t k, std::uint32_t layer_id = 0);

// k indices drawn uniformly without replacement; zero-valued draws are dropped.
SparseChunk rand_k(std::span<const double> x, std::size_t k, Rng& rng,
                   std::uint32_t layer_id = 0);

/// Threshold estimated from a uniform sample of ceil(sample_fraction * n)
/// elements; every entry at or above it is selected. Falls back to exact
/// top_k when the selection holds more than 2k or fewer than k/2 entries.
/// sample_fraction == 1 is exactly top_k.
SparseChunk sampled_top_k(std::span<const double> x, std::size_t k, double sample_fraction,
                          Rng& rng, std::uint32_t layer_id = 0);
SparseChunkF32 sampled_top_k(std::span<const float> x, std::size_t k, double sample_fraction,
                             Rng& rng, std::uint32_t layer_id = 0);

std::vector<double> decompress(const SparseChunk& chunk);
std::vector<float> decompress(const SparseChunkF32& chunk);

/// Adds the chunk's values into out (which must have chunk.dim elements).
void scatter_add(const SparseChunk& chunk, std::span<double> out);

/// Throws StructuralError if the chunk breaks its ordering/size invariants.
void validate_chunk(const SparseChunk& chunk);

/// k = max(1, floor(dim / ratio)).
std::size_t k_from_ratio(std::size_t dim, double ratio);

/// Per-layer compression ratios c(l) >= 1, each at most the cap c_u.
class CompressionPolicy {
 public:
  CompressionPolicy() = default;
  CompressionPolicy(std::map<std::uint32_t, double> per_layer_ratio, double ratio_cap);

  static CompressionPolicy uniform(double ratio, std::size_t num_layers);
  static CompressionPolicy lossless(std::size_t num_layers) { return uniform(1.0, num_layers); }

  double ratio(std::uint32_t layer_id) const;
  std::size_t k_for(std::uint32_t layer_id, std::size_t dim) const;
  double ratio_cap() const { return ratio_cap_; }
  const std::map<std::uint32_t, double>& ratios() const { return per_layer_ratio_; }

  /// Largest configured ratio.
  double max_ratio() const;
  bool is_lossless() const;

  /// Throws StructuralError unless every layer of the shape has a ratio.
  void validate_for(const Shape& shape) const;

  /// Realized c_max = max over layers of dim / k, which is >= max_ratio()
  /// because k is floored.
  double effective_c_max(const Shape& shape) const;

 private:
  std::map<std::uint32_t, double> per_layer_ratio_;
  double ratio_cap_ = 1.0;
};

/// Several chunks shipped as one message; per-chunk layer ids are kept.
struct FusedMessage {
  std::vector<SparseChunk> chunks;

  std::size_t byte_size() const;
  friend bool operator==(const FusedMessage&, const FusedMessage&) = default;
};

/// Merges the buffer into one message when its byte size reaches the capacity,
/// or when the first layer's gradient is done and the buffer is non-empty.
std::optional<FusedMessage> fusion_flush(std::span<const SparseChunk> buffer,
                                         std::size_t capacity_bytes, bool first_layer_done);

/// Stateful wrapper around fusion_flush for a backward pass that produces
/// chunks from layer L down to layer 1.
class FusionBuffer {
 public:
  explicit FusionBuffer(std::size_t capacity_bytes);

  std::optional<FusedMessage> push(SparseChunk chunk, bool first_layer_done);

  std::size_t buffered_bytes() const;
  bool empty() const { return pending_.empty(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::vector<SparseChunk> pending_;
};

}  // namespace lags
