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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nestpool/model.hpp"

namespace nestpool {

using TaskId = std::string;

inline constexpr double kDefaultPoolWeightStd = 0.05;

// Everything a colluder needs to pull one model out of a carrier.
struct SecretKey {
  std::uint64_t v = 0;                      // starting index, reduced mod each group size
  std::optional<std::uint64_t> noise_seed;  // memorization tasks only
  std::string arch_id;
  KindCounts pool_sizes;
  bool permute = false;  // apply the v-seeded pool permutation during fill

  bool operator==(const SecretKey&) const = default;
};

// Position i of a model's flat array of each kind -> pool index.
//   permute == false:  index(i) = (v + i) mod |P_kind|
//   permute == true:   index(i) = pi_v((v + i) mod |P_kind|)
// where pi_v is pool_permutation(|P_kind|, v, kind).
struct FillAssignment {
  PerKind<std::vector<std::size_t>> indices;
};

std::vector<std::size_t> pool_permutation(std::size_t size, std::uint64_t v, ParamKind kind);

FillAssignment derive_assignment(const ModelSpec& spec, const SecretKey& key);

// Grouped shared scalars plus per-task update buffers.
class ParamPool {
 public:
  struct BufferEntry {
    TaskId task;
    double delta = 0.0;
    double weight = 1.0;
  };

  ParamPool() = default;
  // Throws InvalidArgument if any scale value is negative.
  explicit ParamPool(ParamArrays groups);

  // Option I: the pool is a copy of the carrier's own parameters.
  static ParamPool from_model(const Model& carrier);
  // Option II: weights ~ N(0, weight_std^2), biases 0, scales 1.
  static ParamPool from_scratch(const KindCounts& sizes, std::uint64_t seed,
                                double weight_std = kDefaultPoolWeightStd);

  KindCounts sizes() const noexcept;
  const ParamArrays& groups() const noexcept { return groups_; }
  const std::vector<double>& group(ParamKind kind) const noexcept { return groups_[kind]; }

  // Buffers one (task, delta) entry for every pool index the assignment
  // touches. Positions aliasing the same index are averaged first. A task may
  // contribute at most once between two update() calls. `weight` enters the
  // cross-task mean; with all weights equal to 1 it is the plain average.
  void propagate(const TaskId& task, const FillAssignment& assignment, const Model& before,
                 const Model& after, double weight = 1.0);

  // value += weighted mean of buffered deltas, for every index with entries;
  // buffers cleared; scale group clamped to >= 0.
  void update();

  bool has_pending() const noexcept { return !buffers_.empty(); }
  std::vector<BufferEntry> buffer_entries(ParamKind kind, std::size_t index) const;

  bool operator==(const ParamPool& other) const { return groups_ == other.groups_; }

 private:
  struct Contribution {
    double weight = 1.0;
    ParamArrays delta;
    PerKind<std::vector<std::uint8_t>> touched;
  };

  ParamArrays groups_;
  // Ordered by task id so aggregation is independent of visit order.
  std::map<TaskId, Contribution> buffers_;
};

// params_kind[i] = pool_kind[assignment_kind(i)]. Rejects keys whose pool sizes
// or architecture disagree with the pool and spec.
Model fill(const ParamPool& pool, const ModelSpec& spec, const SecretKey& key);

// Colluder-facing name for fill; the architecture comes from the key.
Model assemble(const ParamPool& pool, const SecretKey& key);

// Option I decode: the carrier's per-kind arrays are the pool.
ParamPool decode_direct(const Model& carrier);

enum class FusionStrategy : std::uint8_t { first, first_nonzero, median };

struct SegmentedDecode {
  ParamPool pool;
  // False for pool slots that no real (unpadded) copy in the carrier covers.
  PerKind<std::vector<bool>> covered;
  KindCounts full_copies;
};

// Option II decode: slice each kind into |P|-long segments (zero padded),
// fuse them elementwise, rotate right by v mod |P|, undo the permutation.
SegmentedDecode decode_segmented_detailed(const Model& carrier, const SecretKey& key,
                                          FusionStrategy fusion);
ParamPool decode_segmented(const Model& carrier, const SecretKey& key, FusionStrategy fusion);

// Picks direct decoding when the key describes an Option I carrier (pool sizes
// equal to the carrier's counts, v = 0, no permutation), segmented otherwise.
ParamPool decode(const Model& carrier, const SecretKey& key, FusionStrategy fusion);
bool is_direct_layout(const ModelSpec& carrier, const SecretKey& key) noexcept;

}  // namespace nestpool
