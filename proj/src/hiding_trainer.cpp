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

#include "nestpool/hiding_trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "nestpool/error.hpp"

namespace nestpool {

namespace {

Model fill_with(const ParamPool& pool, const ModelSpec& spec, const FillAssignment& assignment) {
  Model model = zeros_like(spec);
  for (ParamKind kind : kParamKinds) {
    const auto& idx = assignment.indices[kind];
    const auto& group = pool.group(kind);
    auto& out = model.params[kind];
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = group[idx[i]];
  }
  return model;
}

std::size_t effective_batch(const TaskSpec& task, const TrainConfig& cfg) {
  return task.batch_size > 0 ? task.batch_size : cfg.batch_size;
}

std::size_t passes_to_batches(const TaskSpec& task, const TrainConfig& cfg) {
  const std::size_t bs = std::min(effective_batch(task, cfg), task.train.size());
  return (task.train.size() + bs - 1) / bs;
}

bool meets(Metric metric, double value, double target) {
  return metric_higher_is_better(metric) ? value >= target : value <= target;
}

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::carrier: return "carrier";
    case TaskKind::functionality: return "functionality";
    case TaskKind::memorization: return "memorization";
  }
  return "?";
}

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::acc ? "acc" : "mse";
}

bool metric_higher_is_better(Metric metric) noexcept { return metric == Metric::acc; }

void validate(const TrainConfig& cfg) {
  if (cfg.convergence_window < 1) throw InvalidArgument("convergence window must be >= 1");
  if (!(cfg.convergence_tolerance > 0.0)) {
    throw InvalidArgument("convergence tolerance must be positive");
  }
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
    throw InvalidArgument("validation fraction must lie in (0, 1)");
  }
  if (cfg.batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (cfg.max_epochs == 0) throw InvalidArgument("max epochs must be positive");
}

void validate_tasks(const std::vector<TaskSpec>& tasks, const KindCounts& pool_sizes) {
  std::set<TaskId> ids;
  std::size_t carriers = 0;
  for (const TaskSpec& t : tasks) {
    if (t.id.empty()) throw InvalidArgument("task id must not be empty");
    if (!ids.insert(t.id).second) throw InvalidArgument("duplicate task id '" + t.id + "'");
    if (t.kind == TaskKind::carrier) ++carriers;
    if (t.kind != TaskKind::carrier && t.target_metric) {
      throw InvalidArgument("task '" + t.id + "': only the carrier has a target metric");
    }
    if (!(t.key.pool_sizes == pool_sizes)) {
      throw InvalidArgument("task '" + t.id + "': key pool sizes differ from the pool");
    }
    if (!t.key.arch_id.empty() && t.key.arch_id != t.spec.arch_id) {
      throw InvalidArgument("task '" + t.id + "': key architecture differs from the task");
    }
    if (t.train.size() == 0) throw InvalidArgument("task '" + t.id + "' has no training data");
    if (t.validation.size() == 0) {
      throw InvalidArgument("task '" + t.id + "' has no validation data");
    }
    if (t.kind == TaskKind::memorization) {
      if (t.spec.loss != LossKind::mean_squared) {
        throw InvalidArgument("task '" + t.id + "': memorization needs a regression loss");
      }
    } else if (!t.train.is_classification() || t.spec.loss != LossKind::cross_entropy) {
      throw InvalidArgument("task '" + t.id + "': expected a classification task");
    }
  }
  if (carriers != 1) {
    throw InvalidArgument("exactly one carrier task is required, got " +
                          std::to_string(carriers));
  }
}

std::uint64_t task_stream(const TaskId& id) noexcept {
  return streams::kShuffle ^ (fnv1a64(id.data(), id.size()) << 16);
}

std::uint64_t pool_checksum(const ParamPool& pool) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (ParamKind kind : kParamKinds) {
    for (double v : pool.group(kind)) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) {
        hash ^= (bits >> (8 * b)) & 0xffu;
        hash *= 0x100000001b3ull;
      }
    }
  }
  return hash;
}

JointTrainer::JointTrainer(std::vector<TaskSpec> tasks, ParamPool pool, TrainConfig cfg)
    : tasks_(std::move(tasks)), pool_(std::move(pool)), cfg_(cfg) {
  validate(cfg_);
  validate_tasks(tasks_, pool_.sizes());
  states_.reserve(tasks_.size());
  for (const TaskSpec& t : tasks_) {
    states_.push_back(TaskState{
        derive_assignment(t.spec, t.key), make_optimizer(t.optimizer, t.spec),
        BatchCursor(t.train.size(), effective_batch(t, cfg_), cfg_.seed, task_stream(t.id)),
        0.0, 0, {}});
    iterations_per_epoch_ = std::max(iterations_per_epoch_, passes_to_batches(t, cfg_));
  }
  if (cfg_.iterations_per_epoch > 0) iterations_per_epoch_ = cfg_.iterations_per_epoch;
  std::size_t carrier = 0;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (tasks_[i].kind == TaskKind::carrier) {
      carrier = i;
    } else {
      order_.push_back(i);
    }
  }
  order_.push_back(carrier);
}

void JointTrainer::set_visit_order(const std::vector<TaskId>& order) {
  std::vector<std::size_t> next;
  for (const TaskId& id : order) {
    const auto it = std::find_if(tasks_.begin(), tasks_.end(),
                                 [&](const TaskSpec& t) { return t.id == id; });
    if (it == tasks_.end()) throw InvalidArgument("unknown task '" + id + "'");
    next.push_back(static_cast<std::size_t>(it - tasks_.begin()));
  }
  std::vector<std::size_t> sorted = next;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() != tasks_.size() ||
      std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("visit order must name every task exactly once");
  }
  order_ = std::move(next);
}

void JointTrainer::step() {
  for (std::size_t i : order_) {
    const TaskSpec& t = tasks_[i];
    TaskState& s = states_[i];
    Model model = fill_with(pool_, t.spec, s.assignment);
    const Model before = model;
    const std::vector<std::size_t> rows = s.cursor.next();
    if (observer_) observer_(t.id, rows);
    const Batch batch = subset(t.train, rows);
    try {
      const LossAndGrad lg = loss_and_grad(model, batch);
      optimizer_step(s.optimizer, model, lg.grads);
      s.loss_sum += lg.loss;
      ++s.loss_count;
    } catch (const NumericalError& e) {
      throw NumericalError("task '" + t.id + "': " + e.what());
    }
    pool_.propagate(t.id, s.assignment, before, model, t.weight);
  }
  pool_.update();
}

std::vector<EpochRecord> JointTrainer::run_epoch() {
  for (std::size_t it = 0; it < iterations_per_epoch_; ++it) step();
  ++epoch_;
  std::vector<EpochRecord> records;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const TaskSpec& t = tasks_[i];
    TaskState& s = states_[i];
    const Model m = fill_with(pool_, t.spec, s.assignment);
    const double metric = evaluate(m, t.validation, t.metric());
    s.history.push_back(metric);
    const double loss = s.loss_count > 0 ? s.loss_sum / static_cast<double>(s.loss_count) : 0.0;
    records.push_back({epoch_, t.id, loss, metric});
    s.loss_sum = 0.0;
    s.loss_count = 0;
  }
  return records;
}

bool JointTrainer::converged(const TaskSpec& t, const TaskState& s) const {
  const std::size_t w = cfg_.convergence_window;
  if (s.history.size() < w + 1) return false;
  const double now = s.history.back();
  const double then = s.history[s.history.size() - 1 - w];
  const double improvement = metric_higher_is_better(t.metric()) ? now - then : then - now;
  return improvement < cfg_.convergence_tolerance;
}

RunLog JointTrainer::run() {
  RunLog log;
  const std::size_t carrier = order_.back();
  for (std::size_t e = 0; e < cfg_.max_epochs; ++e) {
    for (EpochRecord& r : run_epoch()) log.records.push_back(std::move(r));
    log.pool_snapshots.push_back(pool_checksum(pool_));

    const TaskSpec& c = tasks_[carrier];
    const bool carrier_ok =
        !c.target_metric || meets(c.metric(), states_[carrier].history.back(), *c.target_metric);
    std::optional<TaskId> converged_secret;
    bool any_secret = false;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (i == carrier) continue;
      any_secret = true;
      if (converged(tasks_[i], states_[i])) {
        converged_secret = tasks_[i].id;
        break;
      }
    }
    if (!any_secret && converged(c, states_[carrier])) converged_secret = c.id;
    if (carrier_ok && converged_secret) {
      log.termination = "epoch " + std::to_string(epoch_) +
                        ": carrier requirement met and task '" + *converged_secret +
                        "' converged";
      return log;
    }
  }
  log.termination = "max epochs (" + std::to_string(cfg_.max_epochs) + ") reached";
  return log;
}

const TaskSpec& JointTrainer::task(const TaskId& id) const {
  for (const TaskSpec& t : tasks_) {
    if (t.id == id) return t;
  }
  throw InvalidArgument("unknown task '" + id + "'");
}

Model JointTrainer::model(const TaskId& id) const {
  const TaskSpec& t = task(id);
  return fill(pool_, t.spec, t.key);
}

std::pair<ParamPool, RunLog> train_joint(std::vector<TaskSpec> tasks, ParamPool pool,
                                         const TrainConfig& cfg) {
  JointTrainer trainer(std::move(tasks), std::move(pool), cfg);
  RunLog log = trainer.run();
  return {trainer.pool(), std::move(log)};
}

DirectTrainer::DirectTrainer(Model model, const TaskSpec& task, const TrainConfig& cfg)
    : model_(std::move(model)),
      train_(&task.train),
      optimizer_(make_optimizer(task.optimizer, task.spec)),
      cursor_(task.train.size(), effective_batch(task, cfg), cfg.seed, task_stream(task.id)) {
  if (!(model_.spec == task.spec)) {
    throw InvalidArgument("direct trainer: model does not match task architecture");
  }
}

double DirectTrainer::step() {
  const Batch batch = subset(*train_, cursor_.next());
  const LossAndGrad lg = loss_and_grad(model_, batch);
  optimizer_step(optimizer_, model_, lg.grads);
  return lg.loss;
}

Model train_independent(const TaskSpec& task, const TrainConfig& cfg, std::size_t epochs,
                        std::uint64_t init_seed) {
  DirectTrainer trainer(init_params(task.spec, init_seed), task, cfg);
  const std::size_t steps = epochs * passes_to_batches(task, cfg);
  for (std::size_t i = 0; i < steps; ++i) trainer.step();
  return trainer.model();
}

double evaluate(const Model& model, const Dataset& dataset, Metric metric) {
  const std::size_t n = dataset.size();
  if (n == 0) throw InvalidArgument("cannot evaluate on an empty dataset");
  if (metric == Metric::acc && dataset.labels.size() != n) {
    throw InvalidArgument("ACC needs class labels");
  }
  if (metric == Metric::mse && static_cast<std::size_t>(dataset.targets.rows()) != n) {
    throw InvalidArgument("MSE needs regression targets");
  }
  constexpr std::size_t kChunk = 1024;
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const auto rows = static_cast<Eigen::Index>(std::min(kChunk, n - start));
    const Matrix out =
        forward(model, dataset.inputs.middleRows(static_cast<Eigen::Index>(start), rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::size_t sample = start + static_cast<std::size_t>(r);
      if (metric == Metric::acc) {
        Eigen::Index best = 0;
        out.row(r).maxCoeff(&best);
        if (best == dataset.labels[sample]) total += 1.0;
      } else {
        const auto target = dataset.targets.row(static_cast<Eigen::Index>(sample));
        if (target.size() != out.cols()) throw InvalidArgument("target dimension mismatch");
        total += (out.row(r) - target).norm() / static_cast<double>(target.size());
      }
    }
  }
  return total / static_cast<double>(n);
}

TaskSpec make_permuted_mnist_task(const DataSplit& base, std::uint64_t perm_seed,
                                  const ModelSpec& spec, const SecretKey& key, TaskId id,
                                  OptimizerConfig optimizer) {
  const std::vector<std::size_t> perm =
      pixel_permutation(static_cast<std::size_t>(base.train.inputs.cols()), perm_seed);
  TaskSpec task;
  task.id = std::move(id);
  task.kind = TaskKind::functionality;
  task.spec = spec;
  task.key = key;
  task.train = permute_pixels(base.train, perm);
  task.validation = permute_pixels(base.validation, perm);
  task.optimizer = optimizer;
  return task;
}

}  // namespace nestpool
