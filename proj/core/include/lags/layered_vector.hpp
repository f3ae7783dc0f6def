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
#include <vector>

namespace lags {

/// One learnable layer of the model: its 1-based id and element count.
struct LayerShape {
  std::uint32_t layer_id = 0;
  std::size_t dim = 0;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

using Shape = std::vector<LayerShape>;

/// Builds the shape with consecutive ids 1..L from a list of layer sizes.
Shape make_shape(std::span<const std::size_t> dims);

/// Throws StructuralError unless ids are 1..L in order and every dim is positive.
void validate_shape(const Shape& shape);

std::size_t total_dim(const Shape& shape);

/// A flat vector of doubles partitioned into contiguous layers.
///
/// Layers are stored in id order 1..L regardless of the order in which
/// backpropagation visits them. Element access by layer is 1-based to match
/// layer ids; flat access is 0-based.
class LayeredVector {
 public:
  LayeredVector() = default;
  explicit LayeredVector(Shape shape);
  LayeredVector(Shape shape, std::vector<double> data);

  static LayeredVector zeros(const Shape& shape) { return LayeredVector(shape); }

  const Shape& shape() const { return shape_; }
  std::size_t num_layers() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Offset of layer l (1-based) into the flat data.
  std::size_t offset(std::size_t l) const;

  std::span<double> layer(std::size_t l);
  std::span<const double> layer(std::size_t l) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double squared_norm() const;
  double layer_squared_norm(std::size_t l) const;
  double max_abs() const;
  bool all_finite() const;

  void fill(double value);

  std::vector<std::vector<double>> split() const;

  friend bool operator==(const LayeredVector&, const LayeredVector&) = default;

 private:
  void check_layer(std::size_t l) const;

  Shape shape_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

LayeredVector concat(std::span<const std::vector<double>> parts);

/// y + alpha * x.
LayeredVector axpy(double alpha, const LayeredVector& x, const LayeredVector& y);

/// y += alpha * x in place.
void axpy_inplace(double alpha, const LayeredVector& x, LayeredVector& y);

void require_same_shape(const LayeredVector& a, const LayeredVector& b);

double squared_norm(std::span<const double> x);

}  // namespace lags
