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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nestpool/hiding_trainer.hpp"
#include "nestpool/optimizer.hpp"
#include "nestpool/stealing.hpp"

namespace nestpool {

enum class PoolMode : std::uint8_t { from_model, from_scratch };

struct DataSource {
  std::string source = "synthetic";  // "synthetic" or "idx"
  std::filesystem::path dir;         // idx only: train-{images-idx3,labels-idx1}-ubyte
  std::size_t samples = 10000;
  std::uint64_t seed = 1;

  bool operator==(const DataSource&) const = default;
};

struct PoolSettings {
  PoolMode mode = PoolMode::from_model;
  KindCounts sizes;  // from_scratch only
  std::uint64_t seed = 1;
  double weight_std = kDefaultPoolWeightStd;

  bool operator==(const PoolSettings&) const = default;
};

// One [carrier] or [secret <id>] section.
struct TaskBlock {
  TaskId id;
  TaskKind kind = TaskKind::functionality;
  std::string arch;
  std::uint64_t v = 0;
  bool permute = false;
  std::uint64_t perm_seed = kIdentityPermutation;  // classification tasks
  std::uint64_t init_seed = 1;                     // carrier init under from_model
  OptimizerConfig optimizer;
  std::size_t batch_size = 0;
  double weight = 1.0;
  std::optional<double> baseline;  // carrier: solo-trained validation ACC
  double margin = 0.02;            // carrier requirement: ACC >= baseline - margin
  // memorization tasks
  std::optional<std::uint64_t> noise_seed;
  NoiseKind noise = NoiseKind::gaussian;
  std::size_t targets = 16;
  std::size_t target_height = 8;
  std::size_t target_width = 8;
  std::uint64_t target_seed = 1;

  bool operator==(const TaskBlock&) const = default;
};

// Plain-text experiment description:
//
//   [experiment]  output, seed, max_epochs, batch_size, validation_fraction,
//                 convergence_window, convergence_tolerance, iterations_per_epoch
//   [data]        source, dir, samples, seed
//   [pool]        mode, sizes, seed, weight_std
//   [carrier]     task keys
//   [secret <id>] task keys, one section per secret task
//
// '#' starts a comment line. Unknown sections and keys are rejected.
struct ExperimentConfig {
  TrainConfig train;
  std::filesystem::path output_dir = "out";
  DataSource data;
  PoolSettings pool;
  TaskBlock carrier;
  std::vector<TaskBlock> secrets;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::string_view text);
std::string format_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// Structural checks beyond parsing (unique ids, carrier v under from_model...).
void validate(const ExperimentConfig& config);

}  // namespace nestpool
