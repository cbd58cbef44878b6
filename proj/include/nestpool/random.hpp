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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace nestpool {

// Philox4x32-10 (Salmon et al., SC'11). A pure function of (counter, key), so a
// seed reproduces the same stream on every platform and in every language
// that implements the published algorithm.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

// Well-separated stream ids so that one user seed can drive several
// independent consumers without overlap.
namespace streams {
inline constexpr std::uint64_t kModelInit = 0x1001;
inline constexpr std::uint64_t kPoolInit = 0x1002;
inline constexpr std::uint64_t kPoolPermutation = 0x1003;
inline constexpr std::uint64_t kNoise = 0x1004;
inline constexpr std::uint64_t kShuffle = 0x1005;
inline constexpr std::uint64_t kSplit = 0x1006;
inline constexpr std::uint64_t kPixelPermutation = 0x1007;
inline constexpr std::uint64_t kSynthetic = 0x1008;
inline constexpr std::uint64_t kArchitecture = 0x1009;
}  // namespace streams

// Sequential generator on top of Philox. The 64-bit seed is the key, the
// 64-bit stream id fills the upper half of the counter and the lower half
// counts blocks.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  // 53-bit resolution, in [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  // Unbiased integer in [0, bound) by rejection. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  std::uint64_t block_ = 0;
  std::uint64_t stream_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

// Fisher-Yates shuffle of [0, n) driven by CounterRng(seed, stream).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream);

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm);

// FNV-1a, used to turn task names into stream ids.
std::uint64_t fnv1a64(const void* data, std::size_t size) noexcept;

}  // namespace nestpool
