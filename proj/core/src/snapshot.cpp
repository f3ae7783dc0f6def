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

#include "lags/snapshot.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "lags/byte_io.hpp"
#include "lags/errors.hpp"

namespace lags {
namespace {

constexpr std::uint8_t kMagic[4] = {'L', 'A', 'G', 'S'};

LayeredVector decode_or_throw(std::span<const std::uint8_t> bytes, const std::string& name) {
  byte_io::Reader in(bytes);
  try {
    auto magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
      throw IntegrityError(name, "bad snapshot magic");
    }
    std::uint32_t version = in.u32();
    if (version != kSnapshotVersion) {
      throw IntegrityError(name, "unsupported snapshot version " + std::to_string(version));
    }
    std::uint32_t layers = in.u32();
    if (layers == 0) throw IntegrityError(name, "snapshot has no layers");
    Shape shape;
    std::size_t d = 0;
    for (std::uint32_t i = 0; i < layers; ++i) {
      std::uint32_t id = in.u32();
      std::uint32_t dim = in.u32();
      shape.push_back({id, dim});
      d += dim;
    }
    try {
      validate_shape(shape);
    } catch (const StructuralError& e) {
      throw IntegrityError(name, e.what());
    }
    if (in.remaining() != d * sizeof(double)) {
      throw IntegrityError(name, "payload length " + std::to_string(in.remaining()) +
                                     " does not match " + std::to_string(d) + " doubles");
    }
    std::vector<double> data(d);
    for (auto& x : data) x = in.f64();
    return LayeredVector(std::move(shape), std::move(data));
  } catch (const std::out_of_range&) {
    throw IntegrityError(name, "truncated snapshot");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const LayeredVector& v) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(12 + 8 * v.num_layers() + 8 * v.size());
  byte_io::put_u32(out, kSnapshotVersion);
  byte_io::put_u32(out, static_cast<std::uint32_t>(v.num_layers()));
  for (const auto& s : v.shape()) {
    if (s.dim > std::numeric_limits<std::uint32_t>::max()) {
      throw ArgumentError("layer too large for snapshot format");
    }
    byte_io::put_u32(out, s.layer_id);
    byte_io::put_u32(out, static_cast<std::uint32_t>(s.dim));
  }
  for (double x : v.data()) byte_io::put_f64(out, x);
  return out;
}

LayeredVector decode_snapshot(std::span<const std::uint8_t> bytes) {
  return decode_or_throw(bytes, "<memory>");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError(path.string(), "cannot open file");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

void save_snapshot(const std::filesystem::path& path, const LayeredVector& v) {
  write_file_atomic(path, encode_snapshot(v));
}

LayeredVector load_snapshot(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return decode_or_throw(bytes, path.string());
}

}  // namespace lags
