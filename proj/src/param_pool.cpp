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

#include "nestpool/param_pool.hpp"

#include <algorithm>
#include <cmath>

#include "nestpool/error.hpp"
#include "nestpool/random.hpp"

namespace nestpool {

namespace {

std::string sizes_string(const KindCounts& sizes) {
  return std::to_string(sizes[ParamKind::weight]) + "," +
         std::to_string(sizes[ParamKind::bias]) + "," + std::to_string(sizes[ParamKind::scale]);
}

double fuse(const std::vector<double>& copies, FusionStrategy fusion) {
  switch (fusion) {
    case FusionStrategy::first:
      return copies.front();
    case FusionStrategy::first_nonzero:
      for (double c : copies) {
        if (c != 0.0) return c;
      }
      return 0.0;
    case FusionStrategy::median: {
      std::vector<double> sorted = copies;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      if (sorted.size() % 2 == 1) return sorted[mid];
      return 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
  }
  return copies.front();
}

}  // namespace

std::vector<std::size_t> pool_permutation(std::size_t size, std::uint64_t v, ParamKind kind) {
  return seeded_permutation(size, v, streams::kPoolPermutation + static_cast<std::uint64_t>(kind));
}

FillAssignment derive_assignment(const ModelSpec& spec, const SecretKey& key) {
  const KindCounts counts = spec.param_counts();
  FillAssignment assignment;
  for (ParamKind kind : kParamKinds) {
    const std::size_t n = counts[kind];
    if (n == 0) continue;
    const std::size_t pool_size = key.pool_sizes[kind];
    if (pool_size == 0) {
      throw InvalidArgument(spec.arch_id + " has " + std::to_string(n) + " " +
                            std::string(to_string(kind)) +
                            " parameters but the pool group is empty");
    }
    const std::size_t start = static_cast<std::size_t>(key.v % pool_size);
    auto& indices = assignment.indices[kind];
    indices.resize(n);
    std::size_t cursor = start;
    for (std::size_t i = 0; i < n; ++i) {
      indices[i] = cursor;
      if (++cursor == pool_size) cursor = 0;
    }
    if (key.permute) {
      const std::vector<std::size_t> perm = pool_permutation(pool_size, key.v, kind);
      for (std::size_t& idx : indices) idx = perm[idx];
    }
  }
  return assignment;
}

ParamPool::ParamPool(ParamArrays groups) : groups_(std::move(groups)) {
  for (double s : groups_[ParamKind::scale]) {
    if (!(s >= 0.0)) throw InvalidArgument("scale group values must be non-negative");
  }
}

ParamPool ParamPool::from_model(const Model& carrier) {
  check_shapes(carrier);
  return ParamPool(carrier.params);
}

ParamPool ParamPool::from_scratch(const KindCounts& sizes, std::uint64_t seed,
                                  double weight_std) {
  ParamArrays groups;
  CounterRng rng(seed, streams::kPoolInit);
  groups[ParamKind::weight].resize(sizes[ParamKind::weight]);
  for (double& w : groups[ParamKind::weight]) w = weight_std * rng.normal();
  groups[ParamKind::bias].assign(sizes[ParamKind::bias], 0.0);
  groups[ParamKind::scale].assign(sizes[ParamKind::scale], 1.0);
  return ParamPool(std::move(groups));
}

KindCounts ParamPool::sizes() const noexcept {
  KindCounts sizes;
  for (ParamKind kind : kParamKinds) sizes[kind] = groups_[kind].size();
  return sizes;
}

void ParamPool::propagate(const TaskId& task, const FillAssignment& assignment,
                          const Model& before, const Model& after, double weight) {
  if (!(before.spec == after.spec)) {
    throw InvalidArgument("propagate: before/after models have different architectures");
  }
  if (buffers_.contains(task)) {
    throw InvalidArgument("task '" + task + "' already propagated in this round");
  }
  if (!(weight > 0.0)) throw InvalidArgument("task weight must be positive");

  Contribution contribution;
  contribution.weight = weight;
  for (ParamKind kind : kParamKinds) {
    const auto& idx = assignment.indices[kind];
    const auto& b = before.params[kind];
    const auto& a = after.params[kind];
    if (idx.size() != b.size() || a.size() != b.size()) {
      throw InvalidArgument("propagate: assignment does not match the model's " +
                            std::string(to_string(kind)) + " array");
    }
    const std::size_t pool_size = groups_[kind].size();
    auto& delta = contribution.delta[kind];
    auto& touched = contribution.touched[kind];
    delta.assign(pool_size, 0.0);
    touched.assign(pool_size, 0);
    if (idx.empty()) continue;
    std::vector<std::uint32_t> hits(pool_size, 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= pool_size) throw InvalidArgument("assignment index outside the pool");
      delta[idx[i]] += a[i] - b[i];
      ++hits[idx[i]];
    }
    for (std::size_t j = 0; j < pool_size; ++j) {
      if (hits[j] == 0) continue;
      touched[j] = 1;
      if (hits[j] > 1) delta[j] /= static_cast<double>(hits[j]);
    }
  }
  buffers_.emplace(task, std::move(contribution));
}

void ParamPool::update() {
  for (ParamKind kind : kParamKinds) {
    auto& values = groups_[kind];
    for (std::size_t j = 0; j < values.size(); ++j) {
      double sum = 0.0;
      double total_weight = 0.0;
      for (const auto& [task, c] : buffers_) {
        if (!c.touched[kind][j]) continue;
        sum += c.weight * c.delta[kind][j];
        total_weight += c.weight;
      }
      if (total_weight > 0.0) values[j] += sum / total_weight;
    }
  }
  for (double& s : groups_[ParamKind::scale]) s = std::max(s, 0.0);
  buffers_.clear();
}

std::vector<ParamPool::BufferEntry> ParamPool::buffer_entries(ParamKind kind,
                                                              std::size_t index) const {
  std::vector<BufferEntry> entries;
  for (const auto& [task, c] : buffers_) {
    if (index < c.touched[kind].size() && c.touched[kind][index]) {
      entries.push_back({task, c.delta[kind][index], c.weight});
    }
  }
  return entries;
}

Model fill(const ParamPool& pool, const ModelSpec& spec, const SecretKey& key) {
  if (!key.arch_id.empty() && key.arch_id != spec.arch_id) {
    throw InvalidArgument("key is for architecture '" + key.arch_id + "', not '" +
                          spec.arch_id + "'");
  }
  if (!(key.pool_sizes == pool.sizes())) {
    throw InvalidArgument("key pool sizes (" + sizes_string(key.pool_sizes) +
                          ") do not match the pool (" + sizes_string(pool.sizes()) + ")");
  }
  const FillAssignment assignment = derive_assignment(spec, key);
  Model model = zeros_like(spec);
  for (ParamKind kind : kParamKinds) {
    const auto& idx = assignment.indices[kind];
    const auto& group = pool.group(kind);
    auto& out = model.params[kind];
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = group[idx[i]];
  }
  return model;
}

Model assemble(const ParamPool& pool, const SecretKey& key) {
  return fill(pool, parse_architecture(key.arch_id), key);
}

ParamPool decode_direct(const Model& carrier) {
  check_shapes(carrier);
  return ParamPool(carrier.params);
}

SegmentedDecode decode_segmented_detailed(const Model& carrier, const SecretKey& key,
                                          FusionStrategy fusion) {
  check_shapes(carrier);
  ParamArrays groups;
  SegmentedDecode result;
  for (ParamKind kind : kParamKinds) {
    const auto& values = carrier.params[kind];
    const std::size_t count = values.size();
    const std::size_t pool_size = key.pool_sizes[kind];
    auto& covered = result.covered[kind];
    covered.assign(pool_size, false);
    groups[kind].assign(pool_size, 0.0);
    if (pool_size == 0) continue;
    if (count == 0) {
      throw FormatError("key declares a " + std::string(to_string(kind)) +
                        " group but the carrier has no such parameters");
    }
    if (count < pool_size && fusion != FusionStrategy::first) {
      throw FormatError("declared " + std::string(to_string(kind)) + " pool size " +
                        std::to_string(pool_size) + " exceeds the carrier's " +
                        std::to_string(count) +
                        " parameters; multi-copy fusion needs at least one full copy");
    }
    result.full_copies[kind] = count / pool_size;
    const std::size_t segments = (count + pool_size - 1) / pool_size;

    // Fuse over real copies only; padded tail positions are not copies.
    std::vector<double> fused(pool_size, 0.0);
    std::vector<bool> fused_covered(pool_size, false);
    std::vector<double> copies;
    copies.reserve(segments);
    for (std::size_t j = 0; j < pool_size; ++j) {
      copies.clear();
      for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t pos = s * pool_size + j;
        if (pos < count) copies.push_back(values[pos]);
      }
      if (copies.empty()) continue;
      fused[j] = fuse(copies, fusion);
      fused_covered[j] = true;
    }

    const std::size_t shift = static_cast<std::size_t>(key.v % pool_size);
    std::vector<double> rotated(pool_size);
    std::vector<bool> rotated_covered(pool_size);
    for (std::size_t j = 0; j < pool_size; ++j) {
      const std::size_t dst = (j + shift) % pool_size;
      rotated[dst] = fused[j];
      rotated_covered[dst] = fused_covered[j];
    }

    if (key.permute) {
      // rotated[k] holds pool[perm[k]].
      const std::vector<std::size_t> perm = pool_permutation(pool_size, key.v, kind);
      for (std::size_t k = 0; k < pool_size; ++k) {
        groups[kind][perm[k]] = rotated[k];
        covered[perm[k]] = rotated_covered[k];
      }
    } else {
      groups[kind] = std::move(rotated);
      covered = std::move(rotated_covered);
    }
  }
  for (double& s : groups[ParamKind::scale]) s = std::max(s, 0.0);
  result.pool = ParamPool(std::move(groups));
  return result;
}

ParamPool decode_segmented(const Model& carrier, const SecretKey& key, FusionStrategy fusion) {
  return decode_segmented_detailed(carrier, key, fusion).pool;
}

bool is_direct_layout(const ModelSpec& carrier, const SecretKey& key) noexcept {
  return key.v == 0 && !key.permute && carrier.param_counts() == key.pool_sizes;
}

ParamPool decode(const Model& carrier, const SecretKey& key, FusionStrategy fusion) {
  if (is_direct_layout(carrier.spec, key)) return decode_direct(carrier);
  return decode_segmented(carrier, key, fusion);
}

}  // namespace nestpool
