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

#include "nestpool/analysis.hpp"

#include <cmath>

#include "nestpool/error.hpp"

namespace nestpool {

double WeightHistogram::center(std::size_t bin) const noexcept {
  return -1.0 + static_cast<double>(2 * bin + 1) / static_cast<double>(masses.size());
}

WeightHistogram weight_histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  if (values.empty()) throw InvalidArgument("cannot histogram an empty array");
  WeightHistogram h;
  std::vector<std::size_t> counts(bins, 0);
  const double n = static_cast<double>(bins);
  for (double v : values) {
    if (std::isnan(v)) throw InvalidArgument("cannot histogram NaN values");
    if (v < -1.0 || v > 1.0) ++h.out_of_range;
    const double pos = std::floor((v + 1.0) * 0.5 * n);
    std::size_t bin = 0;
    if (pos >= n) {
      bin = bins - 1;
    } else if (pos > 0.0) {
      bin = static_cast<std::size_t>(pos);
    }
    ++counts[bin];
  }
  h.masses.resize(bins);
  const double total = static_cast<double>(values.size());
  for (std::size_t l = 0; l < bins; ++l) h.masses[l] = static_cast<double>(counts[l]) / total;
  return h;
}

double otd(const WeightHistogram& a, const WeightHistogram& b) {
  if (a.bins() != b.bins() || a.bins() == 0) {
    throw InvalidArgument("OTD needs histograms with the same number of bins");
  }
  double cdf_a = 0.0, cdf_b = 0.0, total = 0.0;
  for (std::size_t l = 0; l + 1 < a.bins(); ++l) {
    cdf_a += a.masses[l];
    cdf_b += b.masses[l];
    total += std::abs(cdf_a - cdf_b);
  }
  return total * a.bin_width();
}

Matrix pairwise_otd(const std::vector<Model>& models, std::size_t bins) {
  if (models.size() < 2) throw InvalidArgument("pairwise OTD needs at least two models");
  std::vector<WeightHistogram> hists;
  hists.reserve(models.size());
  for (const Model& m : models) hists.push_back(weight_histogram(m.weights(), bins));
  const auto k = static_cast<Eigen::Index>(models.size());
  Matrix out = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      out(i, j) = otd(hists[static_cast<std::size_t>(i)], hists[static_cast<std::size_t>(j)]);
      out(j, i) = out(i, j);
    }
  }
  return out;
}

OffDiagonalStats off_diagonal_stats(const Matrix& matrix) {
  std::vector<double> values;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < matrix.cols(); ++j) values.push_back(matrix(i, j));
  }
  if (values.empty()) throw InvalidArgument("matrix has no off-diagonal entries");
  OffDiagonalStats s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(values.size()));
  return s;
}

}  // namespace nestpool
