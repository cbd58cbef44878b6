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

#include "nestpool/stealing.hpp"

#include <algorithm>
#include <cmath>

#include "nestpool/error.hpp"
#include "nestpool/random.hpp"

namespace nestpool {

namespace {

std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

std::string_view to_string(NoiseKind kind) noexcept {
  return kind == NoiseKind::gaussian ? "gaussian" : "uniform";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "gaussian") return NoiseKind::gaussian;
  if (text == "uniform") return NoiseKind::uniform;
  throw InvalidArgument("unknown noise distribution '" + std::string(text) + "'");
}

Matrix make_noise(const NoiseSpec& spec) {
  if (spec.count == 0 || spec.dim == 0) throw InvalidArgument("noise count and dim must be >= 1");
  CounterRng rng(spec.seed, streams::kNoise);
  Matrix z(static_cast<Eigen::Index>(spec.count), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z.data()[i] = spec.kind == NoiseKind::gaussian ? rng.normal() : rng.uniform(-1.0, 1.0);
  }
  return z;
}

void validate(const StealTarget& targets) {
  if (targets.count() == 0 || targets.dim() == 0) throw InvalidArgument("no steal targets");
  if (targets.height * targets.width != targets.dim()) {
    throw InvalidArgument("target shape tag does not match the sample dimension");
  }
  for (Eigen::Index i = 0; i < targets.samples.size(); ++i) {
    const double v = targets.samples.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("steal targets must lie in [0, 1]");
  }
}

StealTarget synthetic_targets(std::size_t count, std::size_t height, std::size_t width,
                              std::uint64_t seed) {
  CounterRng rng(seed, streams::kSynthetic + 2);
  StealTarget t;
  t.height = height;
  t.width = width;
  t.samples.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(height * width));
  for (std::size_t i = 0; i < count; ++i) {
    const double background = rng.uniform(0.05, 0.3);
    const int bumps = 2 + static_cast<int>(rng.below(2));
    std::vector<double> cy(bumps), cx(bumps), radius(bumps), amp(bumps);
    for (int b = 0; b < bumps; ++b) {
      cy[b] = rng.uniform(0.0, static_cast<double>(height - 1));
      cx[b] = rng.uniform(0.0, static_cast<double>(width - 1));
      radius[b] = rng.uniform(0.8, 2.5);
      amp[b] = rng.uniform(0.4, 0.8);
    }
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        double v = background;
        for (int b = 0; b < bumps; ++b) {
          const double dy = static_cast<double>(y) - cy[b];
          const double dx = static_cast<double>(x) - cx[b];
          v += amp[b] * std::exp(-(dy * dy + dx * dx) / (2.0 * radius[b] * radius[b]));
        }
        t.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y * width + x)) =
            std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return t;
}

TaskSpec build_memorization_task(const StealTarget& targets, const NoiseSpec& noise,
                                 const ModelSpec& generator, const SecretKey& key, TaskId id,
                                 OptimizerConfig optimizer) {
  validate(targets);
  if (noise.count != targets.count()) {
    throw InvalidArgument("noise count " + std::to_string(noise.count) + " != target count " +
                          std::to_string(targets.count()));
  }
  if (generator.input_dim() != noise.dim) {
    throw InvalidArgument("generator input dim does not match the noise dim");
  }
  if (generator.output_dim() != targets.dim()) {
    throw InvalidArgument("generator output dim does not match the target dim");
  }
  if (generator.loss != LossKind::mean_squared) {
    throw InvalidArgument("generator architecture must use a regression loss");
  }
  TaskSpec task;
  task.id = std::move(id);
  task.kind = TaskKind::memorization;
  task.spec = generator;
  task.key = key;
  task.key.noise_seed = noise.seed;
  task.train.inputs = make_noise(noise);
  task.train.targets = targets.samples;
  task.validation = task.train;
  task.optimizer = optimizer;
  task.batch_size = targets.count();
  return task;
}

Matrix reconstruct(const Model& generator, const NoiseSpec& noise) {
  if (generator.spec.input_dim() != noise.dim) {
    throw InvalidArgument("generator input dim does not match the noise dim");
  }
  return forward(generator, make_noise(noise)).cwiseMax(0.0).cwiseMin(1.0);
}

double mse_sample(std::span<const double> reconstructed, std::span<const double> original) {
  if (reconstructed.size() != original.size() || original.empty()) {
    throw InvalidArgument("mse: dimension mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = reconstructed[i] - original[i];
    sq += d * d;
  }
  return std::sqrt(sq) / static_cast<double>(original.size());
}

double mse_conventional(std::span<const double> reconstructed, std::span<const double> original) {
  if (reconstructed.size() != original.size() || original.empty()) {
    throw InvalidArgument("mse: dimension mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = reconstructed[i] - original[i];
    sq += d * d;
  }
  return sq / static_cast<double>(original.size());
}

double ssim(std::span<const double> reconstructed, std::span<const double> original,
            double dynamic_range) {
  if (reconstructed.size() != original.size() || original.empty()) {
    throw InvalidArgument("ssim: shape mismatch");
  }
  if (!(dynamic_range > 0.0)) throw InvalidArgument("ssim: dynamic range must be positive");
  const double n = static_cast<double>(original.size());
  double mu_x = 0.0, mu_y = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    mu_x += original[i];
    mu_y += reconstructed[i];
  }
  mu_x /= n;
  mu_y /= n;
  double var_x = 0.0, var_y = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double dx = original[i] - mu_x;
    const double dy = reconstructed[i] - mu_y;
    var_x += dx * dx;
    var_y += dy * dy;
    cov += dx * dy;
  }
  var_x /= n;
  var_y /= n;
  cov /= n;
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  return ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
         ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
}

ReconstructionQuality reconstruction_quality(const Matrix& reconstructed, const Matrix& originals) {
  if (reconstructed.rows() != originals.rows() || reconstructed.cols() != originals.cols() ||
      originals.rows() == 0) {
    throw InvalidArgument("reconstruction and originals differ in shape");
  }
  ReconstructionQuality q;
  for (Eigen::Index r = 0; r < originals.rows(); ++r) {
    q.mean_mse += mse_sample(row_span(reconstructed, r), row_span(originals, r));
    q.mean_ssim += ssim(row_span(reconstructed, r), row_span(originals, r));
  }
  q.mean_mse /= static_cast<double>(originals.rows());
  q.mean_ssim /= static_cast<double>(originals.rows());
  return q;
}

}  // namespace nestpool
