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

#include <filesystem>
#include <vector>

#include "nestpool/config.hpp"
#include "nestpool/hiding_trainer.hpp"
#include "nestpool/param_pool.hpp"
#include "nestpool/stealing.hpp"

namespace nestpool {

// The base classification data named by `[data]`, before any split.
Dataset load_base_dataset(const DataSource& source);

// Base data split with the experiment seed; every classification task shares
// this split and differs only by its pixel permutation.
DataSplit load_base_split(const ExperimentConfig& config);

// Pool group sizes: the carrier's own counts under from-model, the configured
// sizes otherwise.
KindCounts resolve_pool_sizes(const ExperimentConfig& config);

// Pool before joint training.
ParamPool initial_pool(const ExperimentConfig& config);

SecretKey make_key(const TaskBlock& block, const KindCounts& pool_sizes);

// Targets of a memorization block.
StealTarget block_targets(const TaskBlock& block);
NoiseSpec block_noise(const TaskBlock& block);

TaskSpec build_task(const TaskBlock& block, const DataSplit& base, const KindCounts& pool_sizes);

// Carrier first, then secrets in file order.
std::vector<TaskSpec> build_tasks(const ExperimentConfig& config);

// Looks a task block up by id ("carrier" or a secret id).
const TaskBlock& find_block(const ExperimentConfig& config, const TaskId& id);

struct HideResult {
  ParamPool pool;
  RunLog log;
  Model carrier;
  std::vector<TaskSpec> tasks;
};

HideResult run_hide(const ExperimentConfig& config);

// carrier.mtrk, carrier.key (what decode needs), pool.mtrk, keys/<id>.key, targets/<id>.mtrk for memorization
// tasks, and run_log.jsonl under `dir`.
void write_hide_outputs(const ExperimentConfig& config, const HideResult& result,
                        const std::filesystem::path& dir);

}  // namespace nestpool
