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

#include "lags/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lags/errors.hpp"

namespace lags {
namespace {

void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k > n) {
    throw ArgumentError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("vector too long for 32-bit indices");
  }
}

template <typename T>
BasicSparseChunk<T> make_chunk(std::span<const T> x, std::uint32_t layer_id, std::size_t k) {
  BasicSparseChunk<T> chunk;
  chunk.layer_id = layer_id;
  chunk.dim = static_cast<std::uint32_t>(x.size());
  chunk.k_target = k;
  return chunk;
}

// Emits entries for the given indices in ascending index order, skipping zeros.
template <typename T>
void emit_sorted(std::span<const T> x, std::vector<std::uint32_t>& idx, BasicSparseChunk<T>& chunk) {
  std::sort(idx.begin(), idx.end());
  chunk.entries.reserve(idx.size());
  for (auto i : idx) {
    if (x[i] != T(0)) chunk.entries.push_back({i, x[i]});
  }
}

template <typename T>
BasicSparseChunk<T> top_k_impl(std::span<const T> x, std::size_t k, std::uint32_t layer_id) {
  check_k(x.size(), k);
  auto chunk = make_chunk(x, layer_id, k);
  std::vector<std::uint32_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0u);
  // Strict total order: larger magnitude first, then lower index.
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    T ma = std::abs(x[a]);
    T mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  };
  if (k < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
    idx.resize(k);
  }
  emit_sorted(x, idx, chunk);
  return chunk;
}

template <typename T>
BasicSparseChunk<T> sampled_top_k_impl(std::span<const T> x, std::size_t k, double fraction,
                                       Rng& rng, std::uint32_t layer_id) {
  check_k(x.size(), k);
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError("sample_fraction must lie in (0, 1]");
  }
  const std::size_t n = x.size();
  const double wanted = fraction * static_cast<double>(n);
  if (wanted < 1.0) throw ArgumentError("sample_fraction * len(x) must be at least 1");
  const auto m = std::min(n, static_cast<std::size_t>(std::ceil(wanted)));
  if (m == n) return top_k_impl(x, k, layer_id);

  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  std::vector<std::uint32_t> sample;
  sample.reserve(m);
  std::sample(all.begin(), all.end(), std::back_inserter(sample), m, rng);

  std::vector<T> mags;
  mags.reserve(m);
  for (auto i : sample) mags.push_back(std::abs(x[i]));
  // The k-th largest of n maps to rank ceil(k * m / n) in the sample.
  std::size_t rank = (k * m + n - 1) / n;
  rank = std::clamp<std::size_t>(rank, 1, m);
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(rank - 1), mags.end(),
                   std::greater<T>());
  const T threshold = mags[rank - 1];

  auto chunk = make_chunk(x, layer_id, k);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (x[i] != T(0) && std::abs(x[i]) >= threshold) chunk.entries.push_back({i, x[i]});
  }
  const std::size_t count = chunk.entries.size();
  if (count > 2 * k || 2 * count < k) return top_k_impl(x, k, layer_id);
  chunk.k_target = count;
  return chunk;
}

template <typename T>
std::vector<T> decompress_impl(const BasicSparseChunk<T>& chunk) {
  std::vector<T> out(chunk.dim, T(0));
  for (const auto& e : chunk.entries) {
    if (e.index >= chunk.dim) throw StructuralError("chunk index out of range");
    out[e.index] = e.value;
  }
  return out;
}

}  // namespace

SparseChunk top_k(std::span<const double> x, std::size_t k, std::uint32_t layer_id) {
  return top_k_impl(x, k, layer_id);
}

SparseChunkF32 top_k(std::span<const float> x, std::size_t k, std::uint32_t layer_id) {
  return top_k_impl(x, k, layer_id);
}

SparseChunk rand_k(std::span<const double> x, std::size_t k, Rng& rng, std::uint32_t layer_id) {
  check_k(x.size(), k);
  auto chunk = make_chunk(x, layer_id, k);
  std::vector<std::uint32_t> all(x.size());
  std::iota(all.begin(), all.end(), 0u);
  std::vector<std::uint32_t> picked;
  picked.reserve(k);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);
  emit_sorted(x, picked, chunk);
  return chunk;
}

SparseChunk sampled_top_k(std::span<const double> x, std::size_t k, double sample_fraction,
                          Rng& rng, std::uint32_t layer_id) {
  return sampled_top_k_impl(x, k, sample_fraction, rng, layer_id);
}

SparseChunkF32 sampled_top_k(std::span<const float> x, std::size_t k, double sample_fraction,
                             Rng& rng, std::uint32_t layer_id) {
  return sampled_top_k_impl(x, k, sample_fraction, rng, layer_id);
}

std::vector<double> decompress(const SparseChunk& chunk) { return decompress_impl(chunk); }
std::vector<float> decompress(const SparseChunkF32& chunk) { return decompress_impl(chunk); }

void scatter_add(const SparseChunk& chunk, std::span<double> out) {
  if (out.size() != chunk.dim) throw StructuralError("scatter target size differs from chunk dim");
  for (const auto& e : chunk.entries) out[e.index] += e.value;
}

void validate_chunk(const SparseChunk& chunk) {
  if (chunk.entries.size() > chunk.k_target) {
    throw StructuralError("chunk holds more entries than its k_target");
  }
  for (std::size_t i = 0; i < chunk.entries.size(); ++i) {
    if (chunk.entries[i].index >= chunk.dim) throw StructuralError("chunk index out of range");
    if (i > 0 && chunk.entries[i].index <= chunk.entries[i - 1].index) {
      throw StructuralError("chunk indices not strictly increasing");
    }
  }
}

std::size_t k_from_ratio(std::size_t dim, double ratio) {
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
    throw ArgumentError("compression ratio must be a finite value >= 1");
  }
  auto k = static_cast<std::size_t>(std::floor(static_cast<double>(dim) / ratio));
  return std::clamp<std::size_t>(k, 1, dim);
}

CompressionPolicy::CompressionPolicy(std::map<std::uint32_t, double> per_layer_ratio,
                                     double ratio_cap)
    : per_layer_ratio_(std::move(per_layer_ratio)), ratio_cap_(ratio_cap) {
  if (!(ratio_cap_ >= 1.0) || !std::isfinite(ratio_cap_)) {
    throw ArgumentError("ratio cap must be a finite value >= 1");
  }
  for (const auto& [id, c] : per_layer_ratio_) {
    if (!(c >= 1.0) || !std::isfinite(c)) {
      throw ArgumentError("layer " + std::to_string(id) + " ratio must be >= 1");
    }
    if (c > ratio_cap_) {
      throw ArgumentError("layer " + std::to_string(id) + " ratio exceeds cap");
    }
  }
}

CompressionPolicy CompressionPolicy::uniform(double ratio, std::size_t num_layers) {
  std::map<std::uint32_t, double> m;
  for (std::size_t l = 1; l <= num_layers; ++l) m[static_cast<std::uint32_t>(l)] = ratio;
  return CompressionPolicy(std::move(m), ratio);
}

double CompressionPolicy::ratio(std::uint32_t layer_id) const {
  auto it = per_layer_ratio_.find(layer_id);
  if (it == per_layer_ratio_.end()) {
    throw IndexError("no compression ratio for layer " + std::to_string(layer_id));
  }
  return it->second;
}

std::size_t CompressionPolicy::k_for(std::uint32_t layer_id, std::size_t dim) const {
  return k_from_ratio(dim, ratio(layer_id));
}

double CompressionPolicy::max_ratio() const {
  double m = 1.0;
  for (const auto& [id, c] : per_layer_ratio_) m = std::max(m, c);
  return m;
}

bool CompressionPolicy::is_lossless() const {
  return std::all_of(per_layer_ratio_.begin(), per_layer_ratio_.end(),
                     [](const auto& kv) { return kv.second == 1.0; });
}

void CompressionPolicy::validate_for(const Shape& shape) const {
  for (const auto& s : shape) {
    if (!per_layer_ratio_.contains(s.layer_id)) {
      throw StructuralError("compression policy lacks layer " + std::to_string(s.layer_id));
    }
  }
}

double CompressionPolicy::effective_c_max(const Shape& shape) const {
  double m = 1.0;
  for (const auto& s : shape) {
    auto k = k_for(s.layer_id, s.dim);
    m = std::max(m, static_cast<double>(s.dim) / static_cast<double>(k));
  }
  return m;
}

std::size_t FusedMessage::byte_size() const {
  std::size_t n = 0;
  for (const auto& c : chunks) n += c.byte_size();
  return n;
}

std::optional<FusedMessage> fusion_flush(std::span<const SparseChunk> buffer,
                                         std::size_t capacity_bytes, bool first_layer_done) {
  if (capacity_bytes == 0) throw ArgumentError("fusion capacity must be positive");
  std::size_t bytes = 0;
  for (const auto& c : buffer) {
    if (c.byte_size() >= capacity_bytes) {
      throw ArgumentError("fusion capacity " + std::to_string(capacity_bytes) +
                          " does not exceed a single chunk of " + std::to_string(c.byte_size()) +
                          " bytes");
    }
    bytes += c.byte_size();
  }
  if (buffer.empty()) return std::nullopt;
  if (bytes >= capacity_bytes || first_layer_done) {
    return FusedMessage{std::vector<SparseChunk>(buffer.begin(), buffer.end())};
  }
  return std::nullopt;
}

FusionBuffer::FusionBuffer(std::size_t capacity_bytes) : capacity_(capacity_bytes) {
  if (capacity_ == 0) throw ArgumentError("fusion capacity must be positive");
}

std::optional<FusedMessage> FusionBuffer::push(SparseChunk chunk, bool first_layer_done) {
  if (chunk.byte_size() >= capacity_) {
    throw ArgumentError("fusion capacity " + std::to_string(capacity_) +
                        " does not exceed a chunk of " + std::to_string(chunk.byte_size()) +
                        " bytes");
  }
  for (const auto& c : pending_) {
    if (c.layer_id == chunk.layer_id) {
      throw ArgumentError("layer " + std::to_string(chunk.layer_id) + " already buffered");
    }
  }
  pending_.push_back(std::move(chunk));
  auto msg = fusion_flush(pending_, capacity_, first_layer_done);
  if (msg) pending_.clear();
  return msg;
}

std::size_t FusionBuffer::buffered_bytes() const {
  std::size_t n = 0;
  for (const auto& c : pending_) n += c.byte_size();
  return n;
}

}  // namespace lags
