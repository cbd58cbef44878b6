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

#include "nestpool/optimizer.hpp"

#include <cmath>

#include "nestpool/error.hpp"

namespace nestpool {

OptimizerState make_optimizer(const OptimizerConfig& config, const ModelSpec& spec) {
  if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  OptimizerState state{config, {}, {}, 0};
  if (config.kind == OptimizerKind::adam) {
    const KindCounts counts = spec.param_counts();
    for (ParamKind kind : kParamKinds) {
      state.first_moment[kind].assign(counts[kind], 0.0);
      state.second_moment[kind].assign(counts[kind], 0.0);
    }
  }
  return state;
}

void optimizer_step(OptimizerState& state, Model& model, const ParamArrays& grads,
                    const KindCounts& first_trainable) {
  for (ParamKind kind : kParamKinds) {
    if (grads[kind].size() != model.params[kind].size()) {
      throw InvalidArgument("gradient shape does not match the model");
    }
    if (state.config.kind == OptimizerKind::adam &&
        state.first_moment[kind].size() != model.params[kind].size()) {
      throw InvalidArgument("optimizer state was built for a different model");
    }
    for (double g : grads[kind]) {
      if (!std::isfinite(g)) {
        throw NumericalError("non-finite " + std::string(to_string(kind)) +
                             " gradient; step refused");
      }
    }
  }

  ++state.step;
  const OptimizerConfig& cfg = state.config;
  const double lr = cfg.learning_rate;
  if (cfg.kind == OptimizerKind::sgd) {
    for (ParamKind kind : kParamKinds) {
      auto& theta = model.params[kind];
      const auto& g = grads[kind];
      for (std::size_t i = first_trainable[kind]; i < theta.size(); ++i) theta[i] -= lr * g[i];
    }
    return;
  }

  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (ParamKind kind : kParamKinds) {
    auto& theta = model.params[kind];
    auto& m = state.first_moment[kind];
    auto& v = state.second_moment[kind];
    const auto& g = grads[kind];
    for (std::size_t i = first_trainable[kind]; i < theta.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace nestpool
