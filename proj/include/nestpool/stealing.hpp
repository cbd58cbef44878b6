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
#include <span>

#include "nestpool/hiding_trainer.hpp"
#include "nestpool/model.hpp"

namespace nestpool {

enum class NoiseKind : std::uint8_t { gaussian, uniform };

std::string_view to_string(NoiseKind kind) noexcept;
NoiseKind parse_noise_kind(std::string_view text);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

// count x dim matrix, row i is z_i. Gaussian entries are N(0, 1), uniform
// entries U[-1, 1]; both come from CounterRng(seed, streams::kNoise) in
// row-major order.
Matrix make_noise(const NoiseSpec& spec);

// M sensitive inputs in [0, 1], one per row, all of shape height x width.
struct StealTarget {
  Matrix samples;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t count() const noexcept { return static_cast<std::size_t>(samples.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(samples.cols()); }
};

void validate(const StealTarget& targets);

// Smooth grayscale test images: a dim background plus a few Gaussian bumps.
StealTarget synthetic_targets(std::size_t count, std::size_t height, std::size_t width,
                              std::uint64_t seed);

// Memorization task pairing z_i with x_i. Inputs are the noise rows and
// targets the images, in the same order, so shuffling batches never breaks the
// pairing. Full batch by default.
TaskSpec build_memorization_task(const StealTarget& targets, const NoiseSpec& noise,
                                 const ModelSpec& generator, const SecretKey& key, TaskId id,
                                 OptimizerConfig optimizer = OptimizerConfig::adam());

// forward(generator, make_noise(noise)) clamped to [0, 1].
Matrix reconstruct(const Model& generator, const NoiseSpec& noise);

// ||x_hat - x||_2 / dim(x). Note: the norm, not its square.
double mse_sample(std::span<const double> reconstructed, std::span<const double> original);

// Conventional mean of squared differences, for sanity checks.
double mse_conventional(std::span<const double> reconstructed, std::span<const double> original);

// Single-window SSIM over the whole image with c1 = (0.01 L)^2, c2 = (0.03 L)^2.
double ssim(std::span<const double> reconstructed, std::span<const double> original,
            double dynamic_range = 1.0);

struct ReconstructionQuality {
  double mean_mse = 0.0;   // mse_sample averaged over samples
  double mean_ssim = 0.0;
};

ReconstructionQuality reconstruction_quality(const Matrix& reconstructed, const Matrix& originals);

}  // namespace nestpool
