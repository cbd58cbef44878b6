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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nestpool/dataset.hpp"
#include "nestpool/model.hpp"
#include "nestpool/optimizer.hpp"
#include "nestpool/param_pool.hpp"

namespace nestpool {

enum class TaskKind : std::uint8_t { carrier, functionality, memorization };
enum class Metric : std::uint8_t { acc, mse };

std::string_view to_string(TaskKind kind) noexcept;
std::string_view to_string(Metric metric) noexcept;

// Higher is better for ACC, lower for MSE.
bool metric_higher_is_better(Metric metric) noexcept;

struct TaskSpec {
  TaskId id;
  TaskKind kind = TaskKind::functionality;
  ModelSpec spec;
  SecretKey key;
  Dataset train;
  Dataset validation;  // memorization tasks validate on their own pairs
  OptimizerConfig optimizer;
  std::size_t batch_size = 0;  // 0 = TrainConfig::batch_size
  double weight = 1.0;         // weight in the cross-task buffer mean
  std::optional<double> target_metric;  // carrier only: the "task requirement"

  Metric metric() const noexcept {
    return kind == TaskKind::memorization ? Metric::mse : Metric::acc;
  }
};

struct TrainConfig {
  std::size_t max_epochs = 20;
  std::size_t batch_size = 64;
  double validation_fraction = 0.1;
  // Converged: validation metric improved by less than `tolerance` over the
  // last `window` epochs.
  std::size_t convergence_window = 3;
  double convergence_tolerance = 0.002;
  std::uint64_t seed = 1;
  // 0 = enough iterations for the largest training set to be seen once.
  std::size_t iterations_per_epoch = 0;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);

// Throws InvalidArgument unless there is exactly one carrier, ids are unique
// and every key references the same pool sizes.
void validate_tasks(const std::vector<TaskSpec>& tasks, const KindCounts& pool_sizes);

struct EpochRecord {
  std::size_t epoch = 0;
  TaskId task;
  double loss = 0.0;    // mean training loss over the epoch's batches
  double metric = 0.0;  // validation metric at the end of the epoch

  bool operator==(const EpochRecord&) const = default;
};

struct RunLog {
  std::vector<EpochRecord> records;
  std::vector<std::uint64_t> pool_snapshots;  // checksum of the pool after each epoch
  std::string termination;

  bool operator==(const RunLog&) const = default;
};

// Stream id used to shuffle a task's batches; shared by the joint and the
// direct trainer so both see the same data order.
std::uint64_t task_stream(const TaskId& id) noexcept;

// FNV-1a over the pool's little-endian float bytes.
std::uint64_t pool_checksum(const ParamPool& pool);

// One fill -> step -> propagate round per task, then a single pool update.
class JointTrainer {
 public:
  using BatchObserver = std::function<void(const TaskId&, const std::vector<std::size_t>&)>;

  JointTrainer(std::vector<TaskSpec> tasks, ParamPool pool, TrainConfig cfg);

  // Tasks are visited in construction order with the carrier moved last.
  void set_visit_order(const std::vector<TaskId>& order);
  void set_batch_observer(BatchObserver observer) { observer_ = std::move(observer); }

  void step();
  std::vector<EpochRecord> run_epoch();
  RunLog run();

  const ParamPool& pool() const noexcept { return pool_; }
  const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }
  Model model(const TaskId& id) const;
  std::size_t iterations_per_epoch() const noexcept { return iterations_per_epoch_; }

 private:
  struct TaskState {
    FillAssignment assignment;
    OptimizerState optimizer;
    BatchCursor cursor;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::vector<double> history;
  };

  const TaskSpec& task(const TaskId& id) const;
  bool converged(const TaskSpec& task, const TaskState& state) const;

  std::vector<TaskSpec> tasks_;
  std::vector<TaskState> states_;
  std::vector<std::size_t> order_;
  ParamPool pool_;
  TrainConfig cfg_;
  std::size_t iterations_per_epoch_ = 0;
  std::size_t epoch_ = 0;
  BatchObserver observer_;
};

std::pair<ParamPool, RunLog> train_joint(std::vector<TaskSpec> tasks, ParamPool pool,
                                         const TrainConfig& cfg);

// Plain training of one model with the batch order a JointTrainer would use
// for a task with the same id. The oracle for the joint loop and the source of
// independently trained baselines.
class DirectTrainer {
 public:
  DirectTrainer(Model model, const TaskSpec& task, const TrainConfig& cfg);

  double step();
  const Model& model() const noexcept { return model_; }

 private:
  Model model_;
  const Dataset* train_;
  OptimizerState optimizer_;
  BatchCursor cursor_;
};

// Trains init_params(task.spec, init_seed) for `epochs` passes of the task's
// own training set; returns the model.
Model train_independent(const TaskSpec& task, const TrainConfig& cfg, std::size_t epochs,
                        std::uint64_t init_seed);

// ACC = share of argmax hits; MSE = mean over samples of ||f(x) - y||_2 / dim(y).
double evaluate(const Model& model, const Dataset& dataset, Metric metric);

inline double delta_perf(double hidden_metric, double baseline_metric) noexcept {
  return hidden_metric - baseline_metric;
}

// Functionality task on a pixel-permuted copy of `base`; the same permutation
// applies to both splits. perm_seed == kIdentityPermutation keeps pixels in place.
TaskSpec make_permuted_mnist_task(const DataSplit& base, std::uint64_t perm_seed,
                                  const ModelSpec& spec, const SecretKey& key, TaskId id,
                                  OptimizerConfig optimizer = OptimizerConfig::sgd());

}  // namespace nestpool
