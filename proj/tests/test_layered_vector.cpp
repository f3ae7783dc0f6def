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

#include <gtest/gtest.h>

#include <random>

#include "lags/errors.hpp"
#include "lags/layered_vector.hpp"

using namespace lags;

TEST(LayeredVector, ConcatTwoParts) {
  std::vector<std::vector<double>> parts{{1, 2}, {3}};
  auto v = concat(parts);
  EXPECT_EQ(std::vector<double>(v.data().begin(), v.data().end()), (std::vector<double>{1, 2, 3}));
  ASSERT_EQ(v.num_layers(), 2u);
  EXPECT_EQ(v.shape()[0].dim, 2u);
  EXPECT_EQ(v.shape()[1].dim, 1u);
  EXPECT_EQ(v.shape()[1].layer_id, 2u);
}

TEST(LayeredVector, NormIsSumOfLayerNorms) {
  std::vector<std::vector<double>> parts{{3}, {4}};
  auto v = concat(parts);
  EXPECT_EQ(v.squared_norm(), 25.0);
  EXPECT_EQ(v.layer_squared_norm(1) + v.layer_squared_norm(2), 25.0);
}

TEST(LayeredVector, LayerSliceIsAView) {
  std::vector<std::vector<double>> parts{{1, 2}, {3}};
  auto v = concat(parts);
  auto s = v.layer(2);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], 3.0);
  EXPECT_EQ(v.layer(1).size(), 2u);
  v.layer(1)[1] = 7.0;
  EXPECT_EQ(v[1], 7.0);
}

TEST(LayeredVector, LayerOutOfRange) {
  std::vector<std::vector<double>> parts{{1, 2}, {3}};
  auto v = concat(parts);
  EXPECT_THROW(v.layer(0), IndexError);
  EXPECT_THROW(v.layer(3), IndexError);
}

TEST(LayeredVector, ConcatErrors) {
  std::vector<std::vector<double>> none;
  EXPECT_THROW(concat(none), StructuralError);
  std::vector<std::vector<double>> with_empty{{1}, {}};
  EXPECT_THROW(concat(with_empty), StructuralError);
}

TEST(LayeredVector, ShapeValidation) {
  EXPECT_THROW(validate_shape({}), StructuralError);
  EXPECT_THROW(validate_shape({{1, 2}, {3, 1}}), StructuralError);
  EXPECT_THROW(validate_shape({{1, 0}}), StructuralError);
  EXPECT_THROW(LayeredVector(Shape{{1, 2}}, {1.0}), StructuralError);
}

TEST(LayeredVector, Axpy) {
  std::vector<std::vector<double>> px{{1, -2}, {3}}, py{{4, 5}, {6}};
  auto x = concat(px), y = concat(py);
  EXPECT_EQ(axpy(0.0, x, y), y);
  EXPECT_EQ(axpy(1.0, x, LayeredVector::zeros(x.shape())), x);
  EXPECT_EQ(axpy(-1.0, x, x), LayeredVector::zeros(x.shape()));
  auto z = axpy(2.0, x, y);
  EXPECT_EQ(z[0], 6.0);
  EXPECT_EQ(z[1], 1.0);
  EXPECT_EQ(z[2], 12.0);
}

TEST(LayeredVector, AxpyShapeMismatch) {
  std::vector<std::vector<double>> pa{{1, 2}, {3}}, pb{{1}, {2, 3}};
  auto a = concat(pa), b = concat(pb);
  EXPECT_THROW(axpy(1.0, a, b), StructuralError);
  EXPECT_THROW(axpy_inplace(1.0, a, b), StructuralError);
}

TEST(LayeredVector, SplitConcatRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> layers(1, 6), width(1, 9);
  std::normal_distribution<double> val;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> parts(layers(rng));
    for (auto& p : parts) {
      p.resize(width(rng));
      for (auto& x : p) x = val(rng);
    }
    auto v = concat(parts);
    EXPECT_EQ(v.split(), parts);
    double sum = 0.0;
    for (std::size_t l = 1; l <= v.num_layers(); ++l) sum += v.layer_squared_norm(l);
    EXPECT_NEAR(sum, v.squared_norm(), 1e-12 * v.squared_norm());
  }
}

TEST(LayeredVector, Helpers) {
  std::vector<std::vector<double>> parts{{1, -5}, {3}};
  auto v = concat(parts);
  EXPECT_EQ(v.max_abs(), 5.0);
  EXPECT_TRUE(v.all_finite());
  v[2] = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(v.all_finite());
  v.fill(0.5);
  EXPECT_EQ(v.squared_norm(), 0.75);
  EXPECT_EQ(v.offset(2), 2u);
  EXPECT_EQ(total_dim(v.shape()), 3u);
}
