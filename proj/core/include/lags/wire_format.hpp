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

#include <cstdint>
#include <span>
#include <vector>

#include "lags/sparsifier.hpp"

namespace lags {

// Chunk:   layer_id u32 | dim u32 | count u32 | count x (index u32, value f64)
// Message: count u32 | chunks...
// All fields little-endian. Decoding validates chunk invariants and rejects
// trailing bytes; decoded chunks carry k_target = count.

std::vector<std::uint8_t> encode_chunk(const SparseChunk& chunk);
void append_chunk(std::vector<std::uint8_t>& out, const SparseChunk& chunk);
SparseChunk decode_chunk(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_message(const FusedMessage& message);
FusedMessage decode_message(std::span<const std::uint8_t> bytes);

/// Serialized size of a chunk: 12 + 12 * count.
std::size_t wire_size(const SparseChunk& chunk);

}  // namespace lags
