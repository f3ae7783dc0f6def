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

#include "lags/wire_format.hpp"

#include <stdexcept>

#include "lags/byte_io.hpp"
#include "lags/errors.hpp"

namespace lags {
namespace {

SparseChunk read_chunk(byte_io::Reader& in) {
  SparseChunk chunk;
  chunk.layer_id = in.u32();
  chunk.dim = in.u32();
  std::uint32_t count = in.u32();
  if (count > chunk.dim) throw StructuralError("chunk count exceeds its dim");
  chunk.entries.resize(count);
  for (auto& e : chunk.entries) {
    e.index = in.u32();
    e.value = in.f64();
  }
  chunk.k_target = count;
  validate_chunk(chunk);
  return chunk;
}

}  // namespace

std::size_t wire_size(const SparseChunk& chunk) { return 12 + 12 * chunk.entries.size(); }

void append_chunk(std::vector<std::uint8_t>& out, const SparseChunk& chunk) {
  byte_io::put_u32(out, chunk.layer_id);
  byte_io::put_u32(out, chunk.dim);
  byte_io::put_u32(out, static_cast<std::uint32_t>(chunk.entries.size()));
  for (const auto& e : chunk.entries) {
    byte_io::put_u32(out, e.index);
    byte_io::put_f64(out, e.value);
  }
}

std::vector<std::uint8_t> encode_chunk(const SparseChunk& chunk) {
  std::vector<std::uint8_t> out;
  out.reserve(wire_size(chunk));
  append_chunk(out, chunk);
  return out;
}

SparseChunk decode_chunk(std::span<const std::uint8_t> bytes) {
  byte_io::Reader in(bytes);
  try {
    auto chunk = read_chunk(in);
    if (!in.done()) throw StructuralError("trailing bytes after chunk");
    return chunk;
  } catch (const std::out_of_range&) {
    throw StructuralError("truncated chunk");
  }
}

std::vector<std::uint8_t> encode_message(const FusedMessage& message) {
  std::vector<std::uint8_t> out;
  byte_io::put_u32(out, static_cast<std::uint32_t>(message.chunks.size()));
  for (const auto& c : message.chunks) append_chunk(out, c);
  return out;
}

FusedMessage decode_message(std::span<const std::uint8_t> bytes) {
  byte_io::Reader in(bytes);
  try {
    FusedMessage msg;
    std::uint32_t count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) msg.chunks.push_back(read_chunk(in));
    if (!in.done()) throw StructuralError("trailing bytes after message");
    return msg;
  } catch (const std::out_of_range&) {
    throw StructuralError("truncated message");
  }
}

}  // namespace lags
