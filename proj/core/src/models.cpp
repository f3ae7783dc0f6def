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

#include "lags/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "lags/errors.hpp"

namespace lags {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

Shape dense_shape(const std::vector<std::size_t>& widths) {
  std::vector<std::size_t> dims;
  for (std::size_t j = 0; j + 1 < widths.size(); ++j) {
    dims.push_back(widths[j + 1] * (widths[j] + 1));
  }
  return make_shape(dims);
}

std::vector<std::size_t> dense_widths(const ModelSpec& spec) {
  if (spec.inputs == 0) throw ArgumentError("model needs a positive input width");
  std::vector<std::size_t> widths{spec.inputs};
  if (spec.kind == ModelKind::kMlp) {
    if (spec.hidden.empty()) throw ArgumentError("mlp needs at least one hidden layer");
    for (auto h : spec.hidden) {
      if (h == 0) throw ArgumentError("hidden width must be positive");
      widths.push_back(h);
    }
  } else if (!spec.hidden.empty()) {
    throw ArgumentError("only the mlp kind takes hidden layers");
  }
  if (spec.kind == ModelKind::kLinearRegression) {
    widths.push_back(1);
  } else {
    if (spec.outputs < 2) throw ArgumentError("classifier needs at least two outputs");
    widths.push_back(spec.outputs);
  }
  return widths;
}

Shape quadratic_shape(const ModelSpec& spec) {
  if (spec.layer_dims.empty()) throw ArgumentError("quadratic needs layer_dims");
  return make_shape(spec.layer_dims);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kQuadratic:
      return "quadratic";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kMlp:
      return "mlp";
    case ModelKind::kLinearRegression:
      return "linear-regression";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "quadratic") return ModelKind::kQuadratic;
  if (name == "logistic" || name == "logistic-regression") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "linear-regression" || name == "linear") return ModelKind::kLinearRegression;
  throw ArgumentError("unknown model kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Model

void Model::check_inputs(const LayeredVector& params, const Dataset& data,
                         std::span<const std::size_t> batch) const {
  if (params.shape() != shape_) throw StructuralError("parameter shape does not match model");
  if (!params.all_finite()) throw NumericError("non-finite parameters");
  if (!uses_data()) return;
  if (batch.empty()) throw ArgumentError("batch is empty");
  for (auto i : batch) {
    if (i >= data.size()) throw IndexError("batch index " + std::to_string(i) + " out of range");
  }
}

double Model::loss(const LayeredVector& params, const Dataset& data,
                   std::span<const std::size_t> batch) const {
  return evaluate(params, data, batch, nullptr);
}

LayeredVector Model::gradient(const LayeredVector& params, const Dataset& data,
                              std::span<const std::size_t> batch) const {
  LayeredVector g(shape_);
  evaluate(params, data, batch, &g);
  return g;
}

double Model::full_loss(const LayeredVector& params, const Dataset& data) const {
  auto all = data.all_indices();
  return loss(params, data, all);
}

LayeredVector Model::full_gradient(const LayeredVector& params, const Dataset& data) const {
  auto all = data.all_indices();
  return gradient(params, data, all);
}

LayeredVector Model::initial_params(std::uint64_t seed) const {
  LayeredVector v(shape_);
  Rng rng(seed);
  for (std::size_t l = 1; l <= shape_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in(l)));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& x : v.layer(l)) x = u(rng);
  }
  return v;
}

// ---------------------------------------------------------------------------
// QuadraticModel

QuadraticModel::QuadraticModel(const ModelSpec& spec) : Model(quadratic_shape(spec)) {
  if (!(spec.eigen_min > 0.0) || !(spec.eigen_max >= spec.eigen_min)) {
    throw ArgumentError("quadratic eigenvalue bounds must satisfy 0 < min <= max");
  }
  const auto d = static_cast<Eigen::Index>(dim());
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  RowMatrix gauss(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) gauss(i, j) = normal(rng);
  }
  RowMatrix q = Eigen::HouseholderQR<RowMatrix>(gauss).householderQ();

  std::uniform_real_distribution<double> u(std::log(spec.eigen_min), std::log(spec.eigen_max));
  Eigen::VectorXd lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = std::exp(u(rng));
  lambda(0) = spec.eigen_max;
  if (d > 1) lambda(d - 1) = spec.eigen_min;
  lambda_max_ = lambda.maxCoeff();
  lambda_min_ = lambda.minCoeff();

  RowMatrix a = q * lambda.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();
  a_.assign(a.data(), a.data() + a.size());

  minimizer_ = LayeredVector(shape());
  for (auto& x : minimizer_.data()) x = normal(rng);
}

std::size_t QuadraticModel::fan_in(std::size_t layer) const { return shape()[layer - 1].dim; }

double QuadraticModel::evaluate_impl(const LayeredVector& params, LayeredVector* grad) const {
  const auto d = static_cast<Eigen::Index>(dim());
  ConstMatrixMap a(a_.data(), d, d);
  Eigen::VectorXd r = ConstVectorMap(params.data().data(), d) -
                      ConstVectorMap(minimizer_.data().data(), d);
  Eigen::VectorXd g = a * r;
  if (grad) {
    if (grad->shape() != shape()) *grad = LayeredVector(shape());
    VectorMap(grad->data().data(), d) = g;
  }
  double value = 0.5 * r.dot(g);
  if (!std::isfinite(value)) throw NumericError("quadratic loss is not finite");
  return value;
}

double QuadraticModel::evaluate(const LayeredVector& params, const Dataset& data,
                                std::span<const std::size_t> batch, LayeredVector* grad) const {
  check_inputs(params, data, batch);
  return evaluate_impl(params, grad);
}

double QuadraticModel::value(const LayeredVector& params) const {
  if (params.shape() != shape()) throw StructuralError("parameter shape does not match model");
  if (!params.all_finite()) throw NumericError("non-finite parameters");
  return evaluate_impl(params, nullptr);
}

LayeredVector QuadraticModel::grad(const LayeredVector& params) const {
  if (params.shape() != shape()) throw StructuralError("parameter shape does not match model");
  if (!params.all_finite()) throw NumericError("non-finite parameters");
  LayeredVector g(shape());
  evaluate_impl(params, &g);
  return g;
}

// ---------------------------------------------------------------------------
// DenseNetwork

DenseNetwork::DenseNetwork(const ModelSpec& spec)
    : Model(dense_shape(dense_widths(spec))), kind_(spec.kind), widths_(dense_widths(spec)) {
  if (kind_ == ModelKind::kQuadratic) throw ArgumentError("DenseNetwork cannot be quadratic");
}

std::size_t DenseNetwork::fan_in(std::size_t layer) const { return widths_[layer - 1]; }

double DenseNetwork::evaluate(const LayeredVector& params, const Dataset& data,
                              std::span<const std::size_t> batch, LayeredVector* grad) const {
  check_inputs(params, data, batch);
  if (data.features() != widths_.front()) {
    throw StructuralError("dataset has " + std::to_string(data.features()) +
                          " features, model expects " + std::to_string(widths_.front()));
  }
  const bool regression = kind_ == ModelKind::kLinearRegression;
  if (regression == data.is_classification()) {
    throw StructuralError("dataset kind does not match model head");
  }
  if (!regression && data.classes() != widths_.back()) {
    throw StructuralError("dataset class count does not match model outputs");
  }

  const auto b = static_cast<Eigen::Index>(batch.size());
  const std::size_t depth = widths_.size() - 1;

  // activations[j] is the input to dense layer j; activations[depth] the output.
  std::vector<RowMatrix> activations(depth + 1);
  activations[0].resize(b, static_cast<Eigen::Index>(widths_[0]));
  for (Eigen::Index i = 0; i < b; ++i) {
    auto xi = data.x(batch[static_cast<std::size_t>(i)]);
    activations[0].row(i) = ConstVectorMap(xi.data(), static_cast<Eigen::Index>(xi.size()));
  }
  for (std::size_t j = 0; j < depth; ++j) {
    const auto out = static_cast<Eigen::Index>(widths_[j + 1]);
    const auto in = static_cast<Eigen::Index>(widths_[j]);
    const double* p = params.layer(j + 1).data();
    ConstMatrixMap w(p, out, in);
    ConstVectorMap bias(p + out * in, out);
    RowMatrix z = activations[j] * w.transpose();
    z.rowwise() += bias.transpose();
    if (j + 1 < depth) z = z.array().tanh().matrix();
    activations[j + 1] = std::move(z);
  }

  const RowMatrix& head = activations[depth];
  RowMatrix delta(head.rows(), head.cols());
  double total = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto idx = batch[static_cast<std::size_t>(i)];
    if (regression) {
      double r = head(i, 0) - data.target(idx);
      total += 0.5 * r * r;
      delta(i, 0) = r * inv_b;
    } else {
      const double m = head.row(i).maxCoeff();
      Eigen::RowVectorXd e = (head.row(i).array() - m).exp().matrix();
      const double s = e.sum();
      const auto y = static_cast<Eigen::Index>(data.label(idx));
      total += std::log(s) + m - head(i, y);
      delta.row(i) = e / s;
      delta(i, y) -= 1.0;
      delta.row(i) *= inv_b;
    }
  }
  const double value = total * inv_b;
  if (!std::isfinite(value)) throw NumericError("loss is not finite");

  if (grad) {
    if (grad->shape() != shape()) *grad = LayeredVector(shape());
    for (std::size_t jj = depth; jj-- > 0;) {
      const auto out = static_cast<Eigen::Index>(widths_[jj + 1]);
      const auto in = static_cast<Eigen::Index>(widths_[jj]);
      double* g = grad->layer(jj + 1).data();
      MatrixMap gw(g, out, in);
      VectorMap gb(g + out * in, out);
      gw.noalias() = delta.transpose() * activations[jj];
      gb = delta.colwise().sum().transpose();
      if (jj > 0) {
        ConstMatrixMap w(params.layer(jj + 1).data(), out, in);
        RowMatrix back = delta * w;
        delta = (back.array() * (1.0 - activations[jj].array().square())).matrix();
      }
    }
    if (!grad->all_finite()) throw NumericError("gradient is not finite");
  }
  return value;
}

std::unique_ptr<Model> make_model(const ModelSpec& spec) {
  if (spec.kind == ModelKind::kQuadratic) return std::make_unique<QuadraticModel>(spec);
  return std::make_unique<DenseNetwork>(spec);
}

double second_moment_estimate(const Model& model, std::span<const LayeredVector> trace,
                              const Dataset& data, std::size_t workers, std::size_t batch_size,
                              std::size_t draws, std::uint64_t seed) {
  if (trace.empty()) throw ArgumentError("second moment estimate needs a non-empty trace");
  if (workers == 0) throw ArgumentError("worker count must be positive");
  if (draws == 0) throw ArgumentError("draw count must be positive");
  if (batch_size == 0) throw ArgumentError("batch size must be positive");

  std::vector<std::vector<std::size_t>> shards;
  if (model.uses_data()) {
    for (std::size_t p = 0; p < workers; ++p) shards.push_back(data.shard(p, workers));
  }
  Rng rng(seed);
  const double inv_p = 1.0 / static_cast<double>(workers);
  double best = 0.0;
  for (const auto& point : trace) {
    double acc = 0.0;
    const std::size_t n_draws = model.uses_data() ? draws : 1;
    for (std::size_t r = 0; r < n_draws; ++r) {
      LayeredVector sum(model.shape());
      for (std::size_t p = 0; p < workers; ++p) {
        std::vector<std::size_t> batch;
        if (model.uses_data()) {
          const auto& shard = shards[p];
          std::sample(shard.begin(), shard.end(), std::back_inserter(batch),
                      std::min(batch_size, shard.size()), rng);
        }
        axpy_inplace(1.0, model.gradient(point, data, batch), sum);
      }
      for (auto& x : sum.data()) x *= inv_p;
      acc += sum.squared_norm();
    }
    best = std::max(best, acc / static_cast<double>(n_draws));
  }
  return best;
}

}  // namespace lags
