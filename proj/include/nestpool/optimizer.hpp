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

#include <cstdint>

#include "nestpool/model.hpp"

namespace nestpool {

enum class OptimizerKind : std::uint8_t { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static OptimizerConfig sgd(double lr = 0.1) { return {OptimizerKind::sgd, lr}; }
  static OptimizerConfig adam(double lr = 0.001) { return {OptimizerKind::adam, lr}; }

  bool operator==(const OptimizerConfig&) const = default;
};

// Moments are allocated for Adam only and always have the model's shape.
struct OptimizerState {
  OptimizerConfig config;
  ParamArrays first_moment;
  ParamArrays second_moment;
  std::uint64_t step = 0;
};

OptimizerState make_optimizer(const OptimizerConfig& config, const ModelSpec& spec);

// Applies one update in place. Entries before `first_trainable[kind]` in each
// kind's array are left untouched (their moments too); since layers are laid
// out in order, a suffix of every array is exactly "the last K layers".
// Throws NumericalError, before touching anything, on a non-finite gradient.
void optimizer_step(OptimizerState& state, Model& model, const ParamArrays& grads,
                    const KindCounts& first_trainable = {});

}  // namespace nestpool
