// Copyright 2026 The nestpool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace nestpool {

// Row-major so that row i of a batch is sample i and weight matrices can be
// viewed in place over the canonical flat arrays.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ParamKind : std::uint8_t { weight = 0, bias = 1, scale = 2 };

inline constexpr std::array<ParamKind, 3> kParamKinds = {ParamKind::weight, ParamKind::bias,
                                                         ParamKind::scale};

std::string_view to_string(ParamKind kind) noexcept;

// One value per parameter kind.
template <class T>
struct PerKind {
  std::array<T, 3> values{};

  T& operator[](ParamKind kind) noexcept { return values[static_cast<std::size_t>(kind)]; }
  const T& operator[](ParamKind kind) const noexcept {
    return values[static_cast<std::size_t>(kind)];
  }
  bool operator==(const PerKind&) const = default;
};

using ParamArrays = PerKind<std::vector<double>>;
using KindCounts = PerKind<std::size_t>;

enum class Activation : std::uint8_t { relu, identity };
enum class OutputHead : std::uint8_t { logits, linear, sigmoid };
enum class LossKind : std::uint8_t { cross_entropy, mean_squared };

// Declarative architecture. Built only through parse_architecture so the
// identifier alone determines the structure.
//
// Registry families, all fully connected:
//   fcn-<d0>-...-<dL>  ReLU hidden, logits head, cross-entropy
//   reg-<d0>-...-<dL>  ReLU hidden, linear head, mean squared
//   gen-<d0>-...-<dL>  ReLU hidden, sigmoid head, mean squared
struct ModelSpec {
  std::string arch_id;
  std::vector<std::size_t> layer_sizes;
  Activation hidden = Activation::relu;
  OutputHead head = OutputHead::logits;
  LossKind loss = LossKind::cross_entropy;

  // Number of affine maps.
  std::size_t num_layers() const noexcept { return layer_sizes.size() - 1; }
  std::size_t input_dim() const noexcept { return layer_sizes.front(); }
  std::size_t output_dim() const noexcept { return layer_sizes.back(); }

  KindCounts param_counts() const noexcept;

  // Start of layer `layer`'s block inside the weight (resp. bias) array.
  std::size_t weight_offset(std::size_t layer) const noexcept;
  std::size_t bias_offset(std::size_t layer) const noexcept;

  bool operator==(const ModelSpec&) const = default;
};

ModelSpec parse_architecture(std::string_view arch_id);

std::string make_arch_id(std::string_view family, const std::vector<std::size_t>& sizes);

struct Model {
  ModelSpec spec;
  ParamArrays params;

  std::vector<double>& weights() noexcept { return params[ParamKind::weight]; }
  const std::vector<double>& weights() const noexcept { return params[ParamKind::weight]; }
  std::vector<double>& biases() noexcept { return params[ParamKind::bias]; }
  const std::vector<double>& biases() const noexcept { return params[ParamKind::bias]; }

  bool operator==(const Model&) const = default;
};

// Zero-valued model with correctly sized arrays.
Model zeros_like(const ModelSpec& spec);

// Throws FormatError unless the array lengths match model.spec.
void check_shapes(const Model& model);

// He initialisation: weights ~ N(0, 2 / fan_in) from CounterRng(seed,
// streams::kModelInit) in canonical order; biases zero.
Model init_params(const ModelSpec& spec, std::uint64_t seed);

// A dataset is just one large batch. Exactly one of `labels` (class indices)
// or `targets` (one row per sample) is populated.
struct Batch {
  Matrix inputs;
  std::vector<int> labels;
  Matrix targets;

  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
  bool is_classification() const noexcept { return !labels.empty(); }
};
using Dataset = Batch;

// Pre-activations of every layer plus the final outputs.
struct ForwardTrace {
  std::vector<Matrix> pre_activations;
  Matrix outputs;
};

ForwardTrace forward_trace(const Model& model, const Matrix& inputs);
Matrix forward(const Model& model, const Matrix& inputs);

struct LossAndGrad {
  double loss = 0.0;
  ParamArrays grads;
};

// Batch-mean loss: cross-entropy, or the mean over samples and output
// coordinates of the squared error.
double loss_value(const Model& model, const Batch& batch);
LossAndGrad loss_and_grad(const Model& model, const Batch& batch);

}  // namespace nestpool
