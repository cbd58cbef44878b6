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
#include <filesystem>
#include <span>
#include <vector>

#include "nestpool/model.hpp"
#include "nestpool/random.hpp"

namespace nestpool {

// Seeded 10-class stand-in for MNIST. Each class is a mixture of a few
// Gaussian modes in a small latent space, pushed through a fixed random
// linear map and a sigmoid into [0, 1]^dim, plus a little pixel noise.
struct SyntheticOptions {
  std::size_t dim = 784;
  std::size_t classes = 10;
  std::size_t latent_dim = 24;
  std::size_t modes_per_class = 3;
  double mode_spread = 1.6;   // stddev of mode centres in latent space
  double latent_noise = 1.0;  // stddev of a sample around its mode
  double pixel_noise = 0.05;
};

// The generative model (modes, projection) depends on `seed` only, so two
// calls with different `count` share their first samples' distribution and
// the samples themselves are a prefix of one stream.
Dataset synthetic_blobs(std::size_t count, std::uint64_t seed,
                        const SyntheticOptions& options = {});

// Standard IDX files (MNIST layout); pixels rescaled to [0, 1]. `limit` = 0
// reads everything.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t limit = 0);
void write_idx(const Dataset& dataset, std::size_t rows, std::size_t cols,
               const std::filesystem::path& images, const std::filesystem::path& labels);

Dataset subset(const Dataset& dataset, std::span<const std::size_t> rows);

struct DataSplit {
  Dataset train;
  Dataset validation;
};

// Seeded shuffle, then the first round(fraction * n) samples go to validation.
DataSplit split_dataset(const Dataset& dataset, double validation_fraction,
                        std::uint64_t seed);

// Seed 0 is reserved for the identity permutation.
inline constexpr std::uint64_t kIdentityPermutation = 0;
std::vector<std::size_t> pixel_permutation(std::size_t dim, std::uint64_t perm_seed);

// out.inputs(:, j) = in.inputs(:, perm[j]).
Dataset permute_pixels(const Dataset& dataset, const std::vector<std::size_t>& perm);

// Endless mini-batch index stream. Each pass over the data is a fresh seeded
// shuffle; the final batch of a pass may be short.
class BatchCursor {
 public:
  BatchCursor(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
              std::uint64_t stream);

  std::vector<std::size_t> next();
  std::size_t passes() const noexcept { return passes_; }
  std::size_t batches_per_pass() const noexcept;

 private:
  void reshuffle();

  std::size_t size_;
  std::size_t batch_size_;
  CounterRng rng_;
  std::vector<std::size_t> order_;
  std::size_t position_ = 0;
  std::size_t passes_ = 0;
};

}  // namespace nestpool
