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

#include "lags/layered_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lags/errors.hpp"

namespace lags {

Shape make_shape(std::span<const std::size_t> dims) {
  Shape shape;
  shape.reserve(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    shape.push_back({static_cast<std::uint32_t>(i + 1), dims[i]});
  }
  validate_shape(shape);
  return shape;
}

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw StructuralError("shape has no layers");
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i].layer_id != i + 1) {
      throw StructuralError("layer ids must be consecutive from 1; got " +
                            std::to_string(shape[i].layer_id) + " at position " +
                            std::to_string(i));
    }
    if (shape[i].dim == 0) {
      throw StructuralError("layer " + std::to_string(shape[i].layer_id) + " has zero size");
    }
  }
}

std::size_t total_dim(const Shape& shape) {
  std::size_t d = 0;
  for (const auto& s : shape) d += s.dim;
  return d;
}

LayeredVector::LayeredVector(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  offsets_.reserve(shape_.size() + 1);
  std::size_t off = 0;
  for (const auto& s : shape_) {
    offsets_.push_back(off);
    off += s.dim;
  }
  offsets_.push_back(off);
  data_.assign(off, 0.0);
}

LayeredVector::LayeredVector(Shape shape, std::vector<double> data)
    : LayeredVector(std::move(shape)) {
  if (data.size() != data_.size()) {
    throw StructuralError("data length " + std::to_string(data.size()) +
                          " does not match shape total " + std::to_string(data_.size()));
  }
  data_ = std::move(data);
}

void LayeredVector::check_layer(std::size_t l) const {
  if (l < 1 || l > shape_.size()) {
    throw IndexError("layer " + std::to_string(l) + " out of range [1, " +
                     std::to_string(shape_.size()) + "]");
  }
}

std::size_t LayeredVector::offset(std::size_t l) const {
  check_layer(l);
  return offsets_[l - 1];
}

std::span<double> LayeredVector::layer(std::size_t l) {
  check_layer(l);
  return std::span<double>(data_).subspan(offsets_[l - 1], shape_[l - 1].dim);
}

std::span<const double> LayeredVector::layer(std::size_t l) const {
  check_layer(l);
  return std::span<const double>(data_).subspan(offsets_[l - 1], shape_[l - 1].dim);
}

double LayeredVector::squared_norm() const { return lags::squared_norm(data_); }

double LayeredVector::layer_squared_norm(std::size_t l) const {
  return lags::squared_norm(layer(l));
}

double LayeredVector::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool LayeredVector::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void LayeredVector::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::vector<std::vector<double>> LayeredVector::split() const {
  std::vector<std::vector<double>> parts;
  parts.reserve(shape_.size());
  for (std::size_t l = 1; l <= shape_.size(); ++l) {
    auto s = layer(l);
    parts.emplace_back(s.begin(), s.end());
  }
  return parts;
}

LayeredVector concat(std::span<const std::vector<double>> parts) {
  if (parts.empty()) throw StructuralError("concat of an empty part list");
  std::vector<std::size_t> dims;
  dims.reserve(parts.size());
  std::vector<double> data;
  for (const auto& p : parts) {
    if (p.empty()) throw StructuralError("concat part is empty");
    dims.push_back(p.size());
    data.insert(data.end(), p.begin(), p.end());
  }
  return LayeredVector(make_shape(dims), std::move(data));
}

void require_same_shape(const LayeredVector& a, const LayeredVector& b) {
  if (a.shape() != b.shape()) throw StructuralError("layered vector shapes differ");
}

LayeredVector axpy(double alpha, const LayeredVector& x, const LayeredVector& y) {
  LayeredVector out = y;
  axpy_inplace(alpha, x, out);
  return out;
}

void axpy_inplace(double alpha, const LayeredVector& x, LayeredVector& y) {
  require_same_shape(x, y);
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += alpha * xs[i];
}

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace lags
