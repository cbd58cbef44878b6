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

#include "nestpool/pipeline.hpp"

#include "nestpool/error.hpp"
#include "nestpool/io.hpp"

namespace nestpool {

Dataset load_base_dataset(const DataSource& source) {
  if (source.source == "synthetic") return synthetic_blobs(source.samples, source.seed);
  if (source.source != "idx") throw InvalidArgument("unknown data source '" + source.source + "'");
  const auto images = source.dir / "train-images-idx3-ubyte";
  const auto labels = source.dir / "train-labels-idx1-ubyte";
  if (!std::filesystem::exists(images) || !std::filesystem::exists(labels)) {
    throw FormatError("missing IDX files under " + source.dir.string());
  }
  return load_idx(images, labels, source.samples);
}

DataSplit load_base_split(const ExperimentConfig& config) {
  return split_dataset(load_base_dataset(config.data), config.train.validation_fraction,
                       config.train.seed);
}

KindCounts resolve_pool_sizes(const ExperimentConfig& config) {
  if (config.pool.mode == PoolMode::from_model) {
    return parse_architecture(config.carrier.arch).param_counts();
  }
  return config.pool.sizes;
}

ParamPool initial_pool(const ExperimentConfig& config) {
  if (config.pool.mode == PoolMode::from_model) {
    return ParamPool::from_model(
        init_params(parse_architecture(config.carrier.arch), config.carrier.init_seed));
  }
  return ParamPool::from_scratch(config.pool.sizes, config.pool.seed, config.pool.weight_std);
}

SecretKey make_key(const TaskBlock& block, const KindCounts& pool_sizes) {
  SecretKey key;
  key.v = block.v;
  key.arch_id = block.arch;
  key.pool_sizes = pool_sizes;
  key.permute = block.permute;
  if (block.kind == TaskKind::memorization) key.noise_seed = block.noise_seed;
  return key;
}

StealTarget block_targets(const TaskBlock& block) {
  return synthetic_targets(block.targets, block.target_height, block.target_width,
                           block.target_seed);
}

NoiseSpec block_noise(const TaskBlock& block) {
  if (!block.noise_seed) throw InvalidArgument("task '" + block.id + "' has no noise_seed");
  NoiseSpec noise;
  noise.kind = block.noise;
  noise.dim = parse_architecture(block.arch).input_dim();
  noise.count = block.targets;
  noise.seed = *block.noise_seed;
  return noise;
}

TaskSpec build_task(const TaskBlock& block, const DataSplit& base, const KindCounts& pool_sizes) {
  const ModelSpec spec = parse_architecture(block.arch);
  const SecretKey key = make_key(block, pool_sizes);
  TaskSpec task;
  if (block.kind == TaskKind::memorization) {
    task = build_memorization_task(block_targets(block), block_noise(block), spec, key, block.id,
                                   block.optimizer);
  } else {
    task = make_permuted_mnist_task(base, block.perm_seed, spec, key, block.id, block.optimizer);
    task.kind = block.kind;
  }
  if (block.batch_size > 0) task.batch_size = block.batch_size;
  task.weight = block.weight;
  if (block.kind == TaskKind::carrier && block.baseline) {
    task.target_metric = *block.baseline - block.margin;
  }
  return task;
}

std::vector<TaskSpec> build_tasks(const ExperimentConfig& config) {
  validate(config);
  const DataSplit base = load_base_split(config);
  const KindCounts sizes = resolve_pool_sizes(config);
  std::vector<TaskSpec> tasks;
  tasks.push_back(build_task(config.carrier, base, sizes));
  for (const TaskBlock& block : config.secrets) tasks.push_back(build_task(block, base, sizes));
  return tasks;
}

const TaskBlock& find_block(const ExperimentConfig& config, const TaskId& id) {
  if (config.carrier.id == id) return config.carrier;
  for (const TaskBlock& block : config.secrets) {
    if (block.id == id) return block;
  }
  throw InvalidArgument("no task '" + id + "' in the config");
}

HideResult run_hide(const ExperimentConfig& config) {
  std::vector<TaskSpec> tasks = build_tasks(config);
  auto [pool, log] = train_joint(tasks, initial_pool(config), config.train);
  HideResult result;
  result.carrier = fill(pool, tasks.front().spec, tasks.front().key);
  result.pool = std::move(pool);
  result.log = std::move(log);
  result.tasks = std::move(tasks);
  return result;
}

void write_hide_outputs(const ExperimentConfig& config, const HideResult& result,
                        const std::filesystem::path& dir) {
  save_model(result.carrier, dir / "carrier.mtrk");
  save_pool(result.pool, dir / "pool.mtrk");
  for (const TaskSpec& task : result.tasks) {
    if (task.kind == TaskKind::carrier) {
      save_key(task.key, dir / "carrier.key");
      continue;
    }
    save_key(task.key, dir / "keys" / (task.id + ".key"));
    if (task.kind == TaskKind::memorization) {
      Tensor targets;
      targets.data = task.train.targets;
      const TaskBlock& block = find_block(config, task.id);
      targets.shape = {static_cast<std::size_t>(targets.data.rows()), block.target_height,
                       block.target_width};
      save_tensor(targets, dir / "targets" / (task.id + ".mtrk"));
    }
  }
  save_run_log(result.log, dir / "run_log.jsonl");
}

}  // namespace nestpool
