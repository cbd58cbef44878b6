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

#include "nestpool/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "nestpool/error.hpp"
#include "nestpool/random.hpp"

namespace nestpool {

namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstRowVectorMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowVectorMap = Eigen::Map<Eigen::RowVectorXd>;

ConstMatrixMap layer_weights(const Model& model, std::size_t layer) {
  const auto& sizes = model.spec.layer_sizes;
  return ConstMatrixMap(model.weights().data() + model.spec.weight_offset(layer),
                        static_cast<Eigen::Index>(sizes[layer + 1]),
                        static_cast<Eigen::Index>(sizes[layer]));
}

ConstRowVectorMap layer_bias(const Model& model, std::size_t layer) {
  return ConstRowVectorMap(model.biases().data() + model.spec.bias_offset(layer),
                           static_cast<Eigen::Index>(model.spec.layer_sizes[layer + 1]));
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

// Numerically stable row-wise softmax.
Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - peak).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

void check_batch(const Model& model, const Batch& batch) {
  if (batch.size() == 0) throw InvalidArgument("empty batch");
  if (static_cast<std::size_t>(batch.inputs.cols()) != model.spec.input_dim()) {
    throw InvalidArgument("batch input dimension " + std::to_string(batch.inputs.cols()) +
                          " does not match " + model.spec.arch_id);
  }
  if (model.spec.loss == LossKind::cross_entropy) {
    if (batch.labels.size() != batch.size()) {
      throw InvalidArgument("cross-entropy loss needs one class label per sample");
    }
    for (int label : batch.labels) {
      if (label < 0 || static_cast<std::size_t>(label) >= model.spec.output_dim()) {
        throw InvalidArgument("class label out of range: " + std::to_string(label));
      }
    }
  } else if (static_cast<std::size_t>(batch.targets.rows()) != batch.size() ||
             static_cast<std::size_t>(batch.targets.cols()) != model.spec.output_dim()) {
    throw InvalidArgument("regression targets do not match the model output shape");
  }
}

}  // namespace

std::string_view to_string(ParamKind kind) noexcept {
  switch (kind) {
    case ParamKind::weight: return "weight";
    case ParamKind::bias: return "bias";
    case ParamKind::scale: return "scale";
  }
  return "?";
}

KindCounts ModelSpec::param_counts() const noexcept {
  KindCounts counts;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    counts[ParamKind::weight] += layer_sizes[l] * layer_sizes[l + 1];
    counts[ParamKind::bias] += layer_sizes[l + 1];
  }
  return counts;
}

std::size_t ModelSpec::weight_offset(std::size_t layer) const noexcept {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer; ++l) offset += layer_sizes[l] * layer_sizes[l + 1];
  return offset;
}

std::size_t ModelSpec::bias_offset(std::size_t layer) const noexcept {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer; ++l) offset += layer_sizes[l + 1];
  return offset;
}

ModelSpec parse_architecture(std::string_view arch_id) {
  ModelSpec spec;
  spec.arch_id = std::string(arch_id);

  const auto dash = arch_id.find('-');
  if (dash == std::string_view::npos) {
    throw InvalidArgument("architecture '" + spec.arch_id + "' has no layer sizes");
  }
  const std::string_view family = arch_id.substr(0, dash);
  if (family == "fcn") {
    spec.head = OutputHead::logits;
    spec.loss = LossKind::cross_entropy;
  } else if (family == "reg") {
    spec.head = OutputHead::linear;
    spec.loss = LossKind::mean_squared;
  } else if (family == "gen") {
    spec.head = OutputHead::sigmoid;
    spec.loss = LossKind::mean_squared;
  } else {
    throw InvalidArgument("unknown architecture family '" + std::string(family) + "'");
  }

  std::string_view rest = arch_id.substr(dash + 1);
  while (true) {
    const auto next = rest.find('-');
    const std::string_view token = rest.substr(0, next);
    std::size_t size = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), size);
    if (ec != std::errc{} || ptr != token.data() + token.size() || size == 0) {
      throw InvalidArgument("bad layer size '" + std::string(token) + "' in '" +
                            spec.arch_id + "'");
    }
    spec.layer_sizes.push_back(size);
    if (next == std::string_view::npos) break;
    rest = rest.substr(next + 1);
  }
  if (spec.layer_sizes.size() < 2) {
    throw InvalidArgument("architecture '" + spec.arch_id + "' needs at least two layers");
  }
  if (family == "fcn" && spec.output_dim() < 2) {
    throw InvalidArgument("classifier '" + spec.arch_id + "' needs at least two classes");
  }
  return spec;
}

std::string make_arch_id(std::string_view family, const std::vector<std::size_t>& sizes) {
  std::ostringstream out;
  out << family;
  for (std::size_t s : sizes) out << '-' << s;
  return out.str();
}

Model zeros_like(const ModelSpec& spec) {
  Model model{spec, {}};
  const KindCounts counts = spec.param_counts();
  for (ParamKind kind : kParamKinds) model.params[kind].assign(counts[kind], 0.0);
  return model;
}

void check_shapes(const Model& model) {
  const KindCounts counts = model.spec.param_counts();
  for (ParamKind kind : kParamKinds) {
    if (model.params[kind].size() != counts[kind]) {
      throw FormatError(std::string(to_string(kind)) + " array has " +
                        std::to_string(model.params[kind].size()) + " entries, " +
                        model.spec.arch_id + " needs " + std::to_string(counts[kind]));
    }
  }
}

Model init_params(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.layer_sizes.size() < 2) throw InvalidArgument("model spec has no layers");
  Model model = zeros_like(spec);
  CounterRng rng(seed, streams::kModelInit);
  auto& w = model.weights();
  std::size_t pos = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(spec.layer_sizes[l]));
    const std::size_t n = spec.layer_sizes[l] * spec.layer_sizes[l + 1];
    for (std::size_t i = 0; i < n; ++i) w[pos++] = stddev * rng.normal();
  }
  return model;
}

ForwardTrace forward_trace(const Model& model, const Matrix& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != model.spec.input_dim()) {
    throw InvalidArgument("input dimension " + std::to_string(inputs.cols()) +
                          " does not match " + model.spec.arch_id);
  }
  check_shapes(model);

  ForwardTrace trace;
  const std::size_t layers = model.spec.num_layers();
  trace.pre_activations.reserve(layers);
  Matrix activation = inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = activation * layer_weights(model, l).transpose();
    z.rowwise() += layer_bias(model, l);
    trace.pre_activations.push_back(z);
    if (l + 1 < layers) {
      activation = model.spec.hidden == Activation::relu ? Matrix(z.cwiseMax(0.0)) : z;
    } else if (model.spec.head == OutputHead::sigmoid) {
      activation = (1.0 + (-z.array()).exp()).inverse().matrix();
    } else {
      activation = std::move(z);
    }
  }
  trace.outputs = std::move(activation);
  return trace;
}

Matrix forward(const Model& model, const Matrix& inputs) {
  return forward_trace(model, inputs).outputs;
}

double loss_value(const Model& model, const Batch& batch) {
  check_batch(model, batch);
  const Matrix out = forward(model, batch.inputs);
  if (!all_finite(out)) throw NumericalError("non-finite activations in " + model.spec.arch_id);
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  if (model.spec.loss == LossKind::cross_entropy) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double peak = out.row(r).maxCoeff();
      const double lse = peak + std::log((out.row(r).array() - peak).exp().sum());
      loss += lse - out(r, batch.labels[static_cast<std::size_t>(r)]);
    }
    loss /= n;
  } else {
    loss = (out - batch.targets).squaredNorm() / (n * static_cast<double>(out.cols()));
  }
  if (!std::isfinite(loss)) throw NumericalError("non-finite loss in " + model.spec.arch_id);
  return loss;
}

LossAndGrad loss_and_grad(const Model& model, const Batch& batch) {
  check_batch(model, batch);
  const ModelSpec& spec = model.spec;
  ForwardTrace trace = forward_trace(model, batch.inputs);
  const Matrix& out = trace.outputs;
  if (!all_finite(out)) throw NumericalError("non-finite activations in " + spec.arch_id);

  const double n = static_cast<double>(batch.size());
  LossAndGrad result;
  Matrix delta;  // dL/dz of the current layer
  if (spec.loss == LossKind::cross_entropy) {
    delta = softmax_rows(out);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const int label = batch.labels[static_cast<std::size_t>(r)];
      const double peak = out.row(r).maxCoeff();
      const double lse = peak + std::log((out.row(r).array() - peak).exp().sum());
      result.loss += lse - out(r, label);
      delta(r, label) -= 1.0;
    }
    result.loss /= n;
    delta /= n;
  } else {
    const double scale = n * static_cast<double>(out.cols());
    const Matrix diff = out - batch.targets;
    result.loss = diff.squaredNorm() / scale;
    delta = (2.0 / scale) * diff;
    if (spec.head == OutputHead::sigmoid) {
      delta.array() *= out.array() * (1.0 - out.array());
    }
  }
  if (!std::isfinite(result.loss)) {
    throw NumericalError("non-finite loss in " + spec.arch_id);
  }

  Model grads = zeros_like(spec);
  const std::size_t layers = spec.num_layers();
  for (std::size_t l = layers; l-- > 0;) {
    const auto rows = static_cast<Eigen::Index>(spec.layer_sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(spec.layer_sizes[l]);
    MatrixMap grad_w(grads.weights().data() + spec.weight_offset(l), rows, cols);
    RowVectorMap grad_b(grads.biases().data() + spec.bias_offset(l), rows);
    if (l == 0) {
      grad_w.noalias() = delta.transpose() * batch.inputs;
    } else {
      const Matrix& z_prev = trace.pre_activations[l - 1];
      if (spec.hidden == Activation::relu) {
        grad_w.noalias() = delta.transpose() * z_prev.cwiseMax(0.0);
      } else {
        grad_w.noalias() = delta.transpose() * z_prev;
      }
    }
    grad_b = delta.colwise().sum();
    if (l > 0) {
      Matrix upstream = delta * layer_weights(model, l);
      if (spec.hidden == Activation::relu) {
        const Matrix& z_prev = trace.pre_activations[l - 1];
        upstream = (z_prev.array() > 0.0).select(upstream, 0.0);
      }
      delta = std::move(upstream);
    }
  }
  result.grads = std::move(grads.params);
  return result;
}

}  // namespace nestpool
