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
#include <span>
#include <vector>

#include "nestpool/model.hpp"

namespace nestpool {

inline constexpr std::size_t kDefaultHistogramBins = 100;

// Normalised equal-width histogram on [-1, 1]; bin l is centred at
// -1 + (2l + 1) / n.
struct WeightHistogram {
  std::vector<double> masses;
  std::size_t out_of_range = 0;  // values clamped into an edge bin

  std::size_t bins() const noexcept { return masses.size(); }
  double center(std::size_t bin) const noexcept;
  double bin_width() const noexcept { return 2.0 / static_cast<double>(masses.size()); }
};

WeightHistogram weight_histogram(std::span<const double> values,
                                 std::size_t bins = kDefaultHistogramBins);

// Optimal transport distance between two histograms over the same bins with
// ground cost |w_l - w_m|. For normalised 1-D histograms this is the
// Wasserstein-1 distance sum_l |CDF1(l) - CDF2(l)| * (2 / n).
double otd(const WeightHistogram& a, const WeightHistogram& b);

// M[j][k] = otd(H_w(models[j]), H_w(models[k])); symmetric, zero diagonal.
Matrix pairwise_otd(const std::vector<Model>& models, std::size_t bins = kDefaultHistogramBins);

struct OffDiagonalStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Population statistics of the strictly upper triangle.
OffDiagonalStats off_diagonal_stats(const Matrix& matrix);

}  // namespace nestpool
