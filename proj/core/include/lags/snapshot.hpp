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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lags/layered_vector.hpp"

namespace lags {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Binary checkpoint layout (all little-endian):
///
///   "LAGS" | version u32 | L u32 | L x (layer_id u32, dim u32) | d x f64
std::vector<std::uint8_t> encode_snapshot(const LayeredVector& v);

/// Throws IntegrityError (file name "<memory>") on bad magic, version,
/// shape or length.
LayeredVector decode_snapshot(std::span<const std::uint8_t> bytes);

void save_snapshot(const std::filesystem::path& path, const LayeredVector& v);
LayeredVector load_snapshot(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace lags
