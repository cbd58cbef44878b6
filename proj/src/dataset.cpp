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

#include "nestpool/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "nestpool/error.hpp"

namespace nestpool {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr double kProjectionGain = 0.8;

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace

Dataset synthetic_blobs(std::size_t count, std::uint64_t seed, const SyntheticOptions& opt) {
  if (opt.classes < 2 || opt.dim == 0 || opt.latent_dim == 0 || opt.modes_per_class == 0) {
    throw InvalidArgument("degenerate synthetic dataset options");
  }
  CounterRng model_rng(seed, streams::kSynthetic);
  const std::size_t modes = opt.classes * opt.modes_per_class;
  Matrix centres(static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(opt.latent_dim));
  for (Eigen::Index i = 0; i < centres.size(); ++i) {
    centres.data()[i] = opt.mode_spread * model_rng.normal();
  }
  Matrix projection(static_cast<Eigen::Index>(opt.dim),
                    static_cast<Eigen::Index>(opt.latent_dim));
  const double proj_std = kProjectionGain / std::sqrt(static_cast<double>(opt.latent_dim));
  for (Eigen::Index i = 0; i < projection.size(); ++i) {
    projection.data()[i] = proj_std * model_rng.normal();
  }
  Eigen::VectorXd offset(static_cast<Eigen::Index>(opt.dim));
  for (Eigen::Index i = 0; i < offset.size(); ++i) offset[i] = 0.5 * model_rng.normal();

  CounterRng sample_rng(seed, streams::kSynthetic + 1);
  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(opt.dim));
  data.labels.resize(count);
  Eigen::VectorXd latent(static_cast<Eigen::Index>(opt.latent_dim));
  for (std::size_t i = 0; i < count; ++i) {
    const auto label = static_cast<std::size_t>(sample_rng.below(opt.classes));
    const auto mode = static_cast<std::size_t>(sample_rng.below(opt.modes_per_class));
    const auto centre = static_cast<Eigen::Index>(label * opt.modes_per_class + mode);
    for (Eigen::Index k = 0; k < latent.size(); ++k) {
      latent[k] = centres(centre, k) + opt.latent_noise * sample_rng.normal();
    }
    const Eigen::VectorXd pre = projection * latent + offset;
    for (Eigen::Index j = 0; j < pre.size(); ++j) {
      const double pixel = 1.0 / (1.0 + std::exp(-pre[j])) + opt.pixel_noise * sample_rng.normal();
      data.inputs(static_cast<Eigen::Index>(i), j) = std::clamp(pixel, 0.0, 1.0);
    }
    data.labels[i] = static_cast<int>(label);
  }
  return data;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t limit) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw FormatError("cannot open " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw FormatError("cannot open " + labels.string());

  if (read_be32(img, images) != kIdxImagesMagic) {
    throw FormatError(images.string() + " is not an IDX image file");
  }
  std::size_t n = read_be32(img, images);
  const std::size_t rows = read_be32(img, images);
  const std::size_t cols = read_be32(img, images);
  if (read_be32(lab, labels) != kIdxLabelsMagic) {
    throw FormatError(labels.string() + " is not an IDX label file");
  }
  const std::size_t n_labels = read_be32(lab, labels);
  if (n_labels != n) throw FormatError("IDX image and label counts differ");
  if (limit > 0) n = std::min(n, limit);

  const std::size_t dim = rows * cols;
  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  data.labels.resize(n);
  std::vector<unsigned char> pixels(dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(dim))) {
      throw FormatError("truncated IDX image data in " + images.string());
    }
    for (std::size_t j = 0; j < dim; ++j) {
      data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          pixels[j] / 255.0;
    }
    char label = 0;
    if (!lab.get(label)) throw FormatError("truncated IDX label data in " + labels.string());
    data.labels[i] = static_cast<unsigned char>(label);
  }
  return data;
}

void write_idx(const Dataset& dataset, std::size_t rows, std::size_t cols,
               const std::filesystem::path& images, const std::filesystem::path& labels) {
  if (static_cast<std::size_t>(dataset.inputs.cols()) != rows * cols ||
      dataset.labels.size() != dataset.size()) {
    throw InvalidArgument("dataset shape does not match the IDX geometry");
  }
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw FormatError("cannot create IDX output files");
  write_be32(img, kIdxImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(dataset.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  write_be32(lab, kIdxLabelsMagic);
  write_be32(lab, static_cast<std::uint32_t>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (Eigen::Index j = 0; j < dataset.inputs.cols(); ++j) {
      const double v = std::clamp(dataset.inputs(static_cast<Eigen::Index>(i), j), 0.0, 1.0);
      img.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
    lab.put(static_cast<char>(dataset.labels[i]));
  }
}

Dataset subset(const Dataset& dataset, std::span<const std::size_t> rows) {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), dataset.inputs.cols());
  if (dataset.is_classification()) out.labels.resize(rows.size());
  if (dataset.targets.size() > 0) {
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), dataset.targets.cols());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.inputs.row(dst) = dataset.inputs.row(src);
    if (dataset.is_classification()) out.labels[i] = dataset.labels[rows[i]];
    if (dataset.targets.size() > 0) out.targets.row(dst) = dataset.targets.row(src);
  }
  return out;
}

DataSplit split_dataset(const Dataset& dataset, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidArgument("validation fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  const auto n_val =
      static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) throw InvalidArgument("dataset too small to split");
  const std::vector<std::size_t> order = seeded_permutation(n, seed, streams::kSplit);
  const std::span<const std::size_t> all(order);
  return {subset(dataset, all.subspan(n_val)), subset(dataset, all.first(n_val))};
}

std::vector<std::size_t> pixel_permutation(std::size_t dim, std::uint64_t perm_seed) {
  if (perm_seed == kIdentityPermutation) {
    std::vector<std::size_t> id(dim);
    for (std::size_t i = 0; i < dim; ++i) id[i] = i;
    return id;
  }
  return seeded_permutation(dim, perm_seed, streams::kPixelPermutation);
}

Dataset permute_pixels(const Dataset& dataset, const std::vector<std::size_t>& perm) {
  if (perm.size() != static_cast<std::size_t>(dataset.inputs.cols())) {
    throw InvalidArgument("pixel permutation length does not match the input dimension");
  }
  Dataset out = dataset;
  for (std::size_t j = 0; j < perm.size(); ++j) {
    out.inputs.col(static_cast<Eigen::Index>(j)) =
        dataset.inputs.col(static_cast<Eigen::Index>(perm[j]));
  }
  return out;
}

BatchCursor::BatchCursor(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                         std::uint64_t stream)
    : size_(dataset_size), batch_size_(std::min(batch_size, dataset_size)), rng_(seed, stream) {
  if (dataset_size == 0 || batch_size == 0) {
    throw InvalidArgument("batch cursor needs a non-empty dataset and batch size");
  }
  order_.resize(size_);
  reshuffle();
}

void BatchCursor::reshuffle() {
  for (std::size_t i = 0; i < size_; ++i) order_[i] = i;
  for (std::size_t i = size_; i > 1; --i) {
    std::swap(order_[i - 1], order_[static_cast<std::size_t>(rng_.below(i))]);
  }
  position_ = 0;
}

std::vector<std::size_t> BatchCursor::next() {
  if (position_ == size_) {
    ++passes_;
    reshuffle();
  }
  const std::size_t end = std::min(size_, position_ + batch_size_);
  std::vector<std::size_t> rows(order_.begin() + static_cast<std::ptrdiff_t>(position_),
                                order_.begin() + static_cast<std::ptrdiff_t>(end));
  position_ = end;
  return rows;
}

std::size_t BatchCursor::batches_per_pass() const noexcept {
  return (size_ + batch_size_ - 1) / batch_size_;
}

}  // namespace nestpool
