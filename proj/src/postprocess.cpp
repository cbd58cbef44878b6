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

#include "nestpool/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nestpool/dataset.hpp"
#include "nestpool/error.hpp"

namespace nestpool {

Model prune_weights(const Model& model, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("prune ratio must lie in [0, 1]");
  check_shapes(model);
  Model out = model;
  const ModelSpec& spec = model.spec;
  auto& w = out.weights();
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t offset = spec.weight_offset(l);
    const std::size_t n = spec.layer_sizes[l] * spec.layer_sizes[l + 1];
    const auto k = static_cast<std::size_t>(std::floor(beta * static_cast<double>(n)));
    if (k == 0) continue;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto smaller = [&](std::size_t a, std::size_t b) {
      const double ma = std::abs(w[offset + a]);
      const double mb = std::abs(w[offset + b]);
      return ma < mb || (ma == mb && a < b);
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), smaller);
    for (std::size_t i = 0; i < k; ++i) w[offset + order[i]] = 0.0;
  }
  return out;
}

Model finetune_last_k(const Model& model, const Dataset& dataset, const FinetuneOptions& options) {
  const ModelSpec& spec = model.spec;
  const std::size_t layers = spec.num_layers();
  if (options.last_layers < 1 || options.last_layers > layers) {
    throw InvalidArgument("K must lie in [1, " + std::to_string(layers) + "], got " +
                          std::to_string(options.last_layers));
  }
  Model out = model;
  if (options.steps == 0) return out;
  if (dataset.size() == 0) throw InvalidArgument("fine-tuning needs data");

  const std::size_t first = layers - options.last_layers;
  KindCounts first_trainable;
  first_trainable[ParamKind::weight] = spec.weight_offset(first);
  first_trainable[ParamKind::bias] = spec.bias_offset(first);

  OptimizerState optimizer = make_optimizer(options.optimizer, spec);
  BatchCursor cursor(dataset.size(), options.batch_size, options.seed, streams::kShuffle);
  for (std::size_t s = 0; s < options.steps; ++s) {
    const Batch batch = subset(dataset, cursor.next());
    const LossAndGrad lg = loss_and_grad(out, batch);
    optimizer_step(optimizer, out, lg.grads, first_trainable);
  }
  return out;
}

}  // namespace nestpool
