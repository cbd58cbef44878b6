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

#include <cstddef>
#include <cstdint>

#include "nestpool/model.hpp"
#include "nestpool/optimizer.hpp"

namespace nestpool {

// In every layer, zeroes the floor(beta * n_layer) weights of smallest |w|
// (ties go to the lower flat index). Biases are left alone.
Model prune_weights(const Model& model, double beta);

struct FinetuneOptions {
  std::size_t last_layers = 1;  // K, 1 <= K <= number of layers
  std::size_t steps = 0;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer = OptimizerConfig::sgd(0.01);
};

// Updates only the last K layers (weights and biases); the first H - K layers
// come back bit-identical.
Model finetune_last_k(const Model& model, const Dataset& dataset, const FinetuneOptions& options);

}  // namespace nestpool
