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
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "lags/dataset.hpp"
#include "lags/layered_vector.hpp"

namespace lags {

enum class ModelKind { kQuadratic, kLogistic, kMlp, kLinearRegression };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  // Quadratic: layer sizes of the parameter vector.
  std::vector<std::size_t> layer_dims;
  // Logistic / MLP / linear regression.
  std::size_t inputs = 0;
  std::vector<std::size_t> hidden;
  std::size_t outputs = 2;
  // Quadratic spectrum bounds; the extreme eigenvalues are pinned to these.
  double eigen_min = 0.1;
  double eigen_max = 10.0;
  std::uint64_t seed = 0;
};

/// A differentiable objective with layer-wise parameters.
///
/// `evaluate` returns the mean loss over the batch and, when `grad` is
/// non-null, writes the layer-wise gradient into it. Every entry point checks
/// the parameter shape (StructuralError) and finiteness (NumericError).
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  const Shape& shape() const { return shape_; }
  std::size_t dim() const { return total_dim(shape_); }

  /// False for objectives that ignore the batch (the quadratic).
  virtual bool uses_data() const { return true; }

  virtual double evaluate(const LayeredVector& params, const Dataset& data,
                          std::span<const std::size_t> batch, LayeredVector* grad) const = 0;

  double loss(const LayeredVector& params, const Dataset& data,
              std::span<const std::size_t> batch) const;
  LayeredVector gradient(const LayeredVector& params, const Dataset& data,
                         std::span<const std::size_t> batch) const;

  double full_loss(const LayeredVector& params, const Dataset& data) const;
  LayeredVector full_gradient(const LayeredVector& params, const Dataset& data) const;

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
  virtual LayeredVector initial_params(std::uint64_t seed) const;

 protected:
  explicit Model(Shape shape) : shape_(std::move(shape)) {}
  void check_inputs(const LayeredVector& params, const Dataset& data,
                    std::span<const std::size_t> batch) const;
  virtual std::size_t fan_in(std::size_t layer) const = 0;

 private:
  Shape shape_;
};

/// f(x) = 1/2 (x - x*)^T A (x - x*), A = Q diag(lambda) Q^T with log-uniform
/// eigenvalues; the smallest and largest are pinned to eigen_min and eigen_max.
class QuadraticModel final : public Model {
 public:
  explicit QuadraticModel(const ModelSpec& spec);

  ModelKind kind() const override { return ModelKind::kQuadratic; }
  bool uses_data() const override { return false; }
  double evaluate(const LayeredVector& params, const Dataset& data,
                  std::span<const std::size_t> batch, LayeredVector* grad) const override;

  /// Smoothness constant C = lambda_max(A).
  double smoothness() const { return lambda_max_; }
  double lambda_min() const { return lambda_min_; }
  const std::vector<double>& matrix() const { return a_; }  // row-major d x d
  const LayeredVector& minimizer() const { return minimizer_; }

  /// Data-free evaluation.
  double value(const LayeredVector& params) const;
  LayeredVector grad(const LayeredVector& params) const;

 protected:
  std::size_t fan_in(std::size_t layer) const override;

 private:
  double evaluate_impl(const LayeredVector& params, LayeredVector* grad) const;

  std::vector<double> a_;
  LayeredVector minimizer_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// Fully connected network: tanh hidden layers followed by either a softmax
/// cross-entropy head (logistic, mlp) or a squared-error head with a single
/// output (linear regression). Each dense layer is one parameter layer laid
/// out as its row-major weight matrix followed by its bias vector.
class DenseNetwork final : public Model {
 public:
  explicit DenseNetwork(const ModelSpec& spec);

  ModelKind kind() const override { return kind_; }
  double evaluate(const LayeredVector& params, const Dataset& data,
                  std::span<const std::size_t> batch, LayeredVector* grad) const override;

  const std::vector<std::size_t>& widths() const { return widths_; }

 protected:
  std::size_t fan_in(std::size_t layer) const override;

 private:
  ModelKind kind_;
  std::vector<std::size_t> widths_;  // inputs, hidden..., outputs
};

std::unique_ptr<Model> make_model(const ModelSpec& spec);

/// Empirical M^2: the max over trace points of the Monte-Carlo mean of
/// ||(1/P) sum_p G^p(x)||^2, where worker p's gradient uses a batch drawn
/// uniformly without replacement from its shard.
double second_moment_estimate(const Model& model, std::span<const LayeredVector> trace,
                              const Dataset& data, std::size_t workers, std::size_t batch_size,
                              std::size_t draws, std::uint64_t seed);

}  // namespace lags
