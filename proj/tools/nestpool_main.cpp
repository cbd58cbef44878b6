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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nestpool/analysis.hpp"
#include "nestpool/config.hpp"
#include "nestpool/error.hpp"
#include "nestpool/io.hpp"
#include "nestpool/pipeline.hpp"
#include "nestpool/postprocess.hpp"
#include "nestpool/stealing.hpp"

namespace fs = std::filesystem;
using namespace nestpool;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::data: return kExitData;
    case ErrorKind::numerical: return kExitNumerical;
  }
  return 1;
}

const std::map<std::string, FusionStrategy> kFusionNames{
    {"first", FusionStrategy::first},
    {"first-nonzero", FusionStrategy::first_nonzero},
    {"median", FusionStrategy::median},
};

const std::map<std::string, NoiseKind> kNoiseNames{
    {"gaussian", NoiseKind::gaussian},
    {"uniform", NoiseKind::uniform},
};

const std::map<std::string, OptimizerKind> kOptimizerNames{
    {"sgd", OptimizerKind::sgd},
    {"adam", OptimizerKind::adam},
};

void print_metric(Metric metric, double value) {
  std::printf("%s %.6f\n", metric == Metric::acc ? "ACC" : "MSE", value);
}

// ---- train-hide / train ------------------------------------------------------

struct TrainHideArgs {
  fs::path config;
  std::optional<fs::path> output;
};

int cmd_train_hide(const TrainHideArgs& a) {
  const ExperimentConfig cfg = load_config(a.config);
  const fs::path out = a.output.value_or(cfg.output_dir);
  const HideResult result = run_hide(cfg);
  write_hide_outputs(cfg, result, out);
  for (const TaskSpec& task : result.tasks) {
    const Model model = fill(result.pool, task.spec, task.key);
    std::printf("%-16s %-14s %s %.6f\n", task.id.c_str(), std::string(to_string(task.kind)).c_str(),
                std::string(to_string(task.metric())).c_str(),
                evaluate(model, task.validation, task.metric()));
  }
  std::printf("termination: %s\n", result.log.termination.c_str());
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

struct TrainArgs {
  fs::path config;
  std::string task;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  fs::path out;
};

int cmd_train(const TrainArgs& a) {
  const ExperimentConfig cfg = load_config(a.config);
  validate(cfg);
  const TaskBlock& block = find_block(cfg, a.task);
  const TaskSpec task = build_task(block, load_base_split(cfg), resolve_pool_sizes(cfg));
  const Model model = train_independent(task, cfg.train, a.epochs, a.seed);
  save_model(model, a.out);
  print_metric(task.metric(), evaluate(model, task.validation, task.metric()));
  return 0;
}

// ---- decode / assemble -------------------------------------------------------

struct DecodeArgs {
  fs::path carrier;
  fs::path key;
  std::string fusion = "first-nonzero";
  fs::path out;
};

int cmd_decode(const DecodeArgs& a) {
  const Model carrier = load_model(a.carrier);
  const SecretKey key = load_key(a.key);
  const bool direct = is_direct_layout(carrier.spec, key);
  const ParamPool pool = decode(carrier, key, kFusionNames.at(a.fusion));
  save_pool(pool, a.out);
  std::printf("decoded %s pool (%s) via %s path\n", format_counts(pool.sizes()).c_str(),
              a.fusion.c_str(), direct ? "direct" : "segmented");
  return 0;
}

struct AssembleArgs {
  fs::path pool;
  fs::path key;
  fs::path out;
};

int cmd_assemble(const AssembleArgs& a) {
  const Model model = assemble(load_pool(a.pool), load_key(a.key));
  save_model(model, a.out);
  std::printf("assembled %s\n", model.spec.arch_id.c_str());
  return 0;
}

// ---- steal / reconstruct -----------------------------------------------------

struct NoiseArgs {
  std::uint64_t seed = 0;
  std::size_t count = 16;
  std::string kind = "gaussian";
};

void add_noise_options(CLI::App* cmd, NoiseArgs& n) {
  cmd->add_option("--noise-seed", n.seed, "Integer seed of the noise sequence")->required();
  cmd->add_option("--count", n.count, "Number of noise vectors / targets");
  cmd->add_option("--noise", n.kind, "Noise distribution")
      ->check(CLI::IsMember({"gaussian", "uniform"}));
}

NoiseSpec noise_spec(const NoiseArgs& n, std::size_t dim) {
  return NoiseSpec{kNoiseNames.at(n.kind), dim, n.count, n.seed};
}

StealTarget target_from_tensor(const Tensor& t) {
  if (t.shape.size() != 3) throw FormatError("targets tensor must have shape count,height,width");
  StealTarget target{t.data, t.shape[1], t.shape[2]};
  validate(target);
  return target;
}

struct StealArgs {
  std::string arch;
  NoiseArgs noise;
  std::optional<fs::path> targets;
  std::size_t height = 8;
  std::size_t width = 8;
  std::uint64_t target_seed = 1;
  std::size_t steps = 2000;
  double lr = 0.001;
  std::uint64_t seed = 1;
  fs::path out;
  std::optional<fs::path> targets_out;
};

int cmd_steal(const StealArgs& a) {
  const ModelSpec spec = parse_architecture(a.arch);
  const StealTarget targets = a.targets ? target_from_tensor(load_tensor(*a.targets))
                                        : synthetic_targets(a.noise.count, a.height, a.width,
                                                            a.target_seed);
  const NoiseSpec noise = noise_spec(a.noise, spec.input_dim());
  SecretKey key;
  key.arch_id = spec.arch_id;
  key.pool_sizes = spec.param_counts();
  const TaskSpec task =
      build_memorization_task(targets, noise, spec, key, "generator", OptimizerConfig::adam(a.lr));
  TrainConfig cfg;
  cfg.seed = a.seed;
  DirectTrainer trainer(init_params(spec, a.seed), task, cfg);
  double loss = 0.0;
  for (std::size_t s = 0; s < a.steps; ++s) loss = trainer.step();
  save_model(trainer.model(), a.out);
  if (a.targets_out) save_tensor(Tensor{{targets.count(), targets.height, targets.width}, targets.samples}, *a.targets_out);
  const ReconstructionQuality q =
      reconstruction_quality(reconstruct(trainer.model(), noise), targets.samples);
  std::printf("loss %.6e\nMSE %.6e\nSSIM %.6f\n", loss, q.mean_mse, q.mean_ssim);
  return 0;
}

struct ReconstructArgs {
  fs::path model;
  NoiseArgs noise;
  std::optional<fs::path> targets;
  std::size_t height = 0;
  std::size_t width = 0;
  std::optional<fs::path> out;
  std::optional<fs::path> pgm_dir;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const Model generator = load_model(a.model);
  const NoiseSpec noise = noise_spec(a.noise, generator.spec.input_dim());
  const Matrix recon = reconstruct(generator, noise);
  std::size_t height = a.height;
  std::size_t width = a.width;
  std::optional<StealTarget> targets;
  if (a.targets) {
    targets = target_from_tensor(load_tensor(*a.targets));
    height = targets->height;
    width = targets->width;
  }
  if (height == 0 || width == 0) {
    width = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(recon.cols()))));
    height = width;
  }
  if (height * width != static_cast<std::size_t>(recon.cols())) {
    throw InvalidArgument("image shape does not match the generator output");
  }
  if (a.out) save_tensor(Tensor{{static_cast<std::size_t>(recon.rows()), height, width}, recon}, *a.out);
  if (a.pgm_dir) {
    for (Eigen::Index i = 0; i < recon.rows(); ++i) {
      const auto row = recon.row(i);
      char name[32];
      std::snprintf(name, sizeof name, "recon_%03ld.pgm", static_cast<long>(i));
      write_pgm({row.data(), static_cast<std::size_t>(row.size())}, height, width,
                *a.pgm_dir / name);
    }
  }
  if (targets) {
    const ReconstructionQuality q = reconstruction_quality(recon, targets->samples);
    std::printf("MSE %.6e\nSSIM %.6f\n", q.mean_mse, q.mean_ssim);
  } else {
    std::printf("reconstructed %ld samples\n", static_cast<long>(recon.rows()));
  }
  return 0;
}

// ---- eval / prune / finetune -------------------------------------------------

struct DataArgs {
  std::optional<fs::path> config;
  std::string task;
  std::optional<fs::path> images;
  std::optional<fs::path> labels;
  std::uint64_t perm_seed = kIdentityPermutation;
  bool train_split = false;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
  auto* config = cmd->add_option("--config", d.config, "Experiment config naming the task");
  cmd->add_option("--task", d.task, "Task id inside the config")->needs(config);
  auto* images = cmd->add_option("--images", d.images, "IDX image file");
  auto* labels = cmd->add_option("--labels", d.labels, "IDX label file");
  images->needs(labels);
  labels->needs(images);
  config->excludes(images);
  cmd->add_option("--perm-seed", d.perm_seed, "Pixel permutation seed for IDX data")
      ->excludes(config);
}

struct LoadedData {
  Dataset dataset;
  Metric metric = Metric::acc;
};

LoadedData load_data(const DataArgs& d, bool prefer_train) {
  if (d.config) {
    const ExperimentConfig cfg = load_config(*d.config);
    validate(cfg);
    const TaskBlock& block = find_block(cfg, d.task.empty() ? cfg.carrier.id : d.task);
    TaskSpec task = build_task(block, load_base_split(cfg), resolve_pool_sizes(cfg));
    return {prefer_train || d.train_split ? task.train : task.validation, task.metric()};
  }
  if (!d.images) throw InvalidArgument("pass --config or --images/--labels");
  Dataset ds = load_idx(*d.images, *d.labels);
  if (d.perm_seed != kIdentityPermutation) {
    ds = permute_pixels(ds, pixel_permutation(ds.inputs.cols(), d.perm_seed));
  }
  return {ds, Metric::acc};
}

struct EvalArgs {
  fs::path model;
  DataArgs data;
};

int cmd_eval(const EvalArgs& a) {
  const Model model = load_model(a.model);
  const LoadedData d = load_data(a.data, false);
  print_metric(d.metric, evaluate(model, d.dataset, d.metric));
  return 0;
}

struct PruneArgs {
  fs::path model;
  double beta = 0.0;
  fs::path out;
};

int cmd_prune(const PruneArgs& a) {
  save_model(prune_weights(load_model(a.model), a.beta), a.out);
  return 0;
}

struct FinetuneArgs {
  fs::path model;
  DataArgs data;
  std::size_t last_k = 1;
  std::size_t steps = 100;
  std::size_t batch = 64;
  double lr = 0.01;
  std::string optimizer = "sgd";
  std::uint64_t seed = 1;
  fs::path out;
};

int cmd_finetune(const FinetuneArgs& a) {
  const Model model = load_model(a.model);
  const LoadedData d = load_data(a.data, true);
  FinetuneOptions opt;
  opt.last_layers = a.last_k;
  opt.steps = a.steps;
  opt.batch_size = a.batch;
  opt.seed = a.seed;
  opt.optimizer = OptimizerConfig{kOptimizerNames.at(a.optimizer), a.lr};
  save_model(finetune_last_k(model, d.dataset, opt), a.out);
  return 0;
}

// ---- otd / histogram / report ------------------------------------------------

struct OtdArgs {
  std::vector<fs::path> models;
  std::size_t bins = kDefaultHistogramBins;
};

int cmd_otd(const OtdArgs& a) {
  std::vector<Model> models;
  for (const fs::path& p : a.models) models.push_back(load_model(p));
  const Matrix m = pairwise_otd(models, a.bins);
  if (models.size() == 2) {
    std::printf("%.12g\n", m(0, 1));
    return 0;
  }
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) std::printf(k ? "\t%.9f" : "%.9f", m(j, k));
    std::printf("\n");
  }
  const OffDiagonalStats s = off_diagonal_stats(m);
  std::printf("# off-diagonal mean %.6f stddev %.6f\n", s.mean, s.stddev);
  return 0;
}

struct HistogramArgs {
  fs::path model;
  std::size_t bins = kDefaultHistogramBins;
};

int cmd_histogram(const HistogramArgs& a) {
  const Model model = load_model(a.model);
  const WeightHistogram h = weight_histogram(model.weights(), a.bins);
  std::printf("# center\tmass\n");
  for (std::size_t l = 0; l < h.bins(); ++l) std::printf("%.6f\t%.9f\n", h.center(l), h.masses[l]);
  if (h.out_of_range > 0) {
    std::fprintf(stderr, "warning: %zu weights outside [-1, 1] clamped into edge bins\n",
                 h.out_of_range);
  }
  return 0;
}

struct ReportArgs {
  fs::path run_log;
};

int cmd_report(const ReportArgs& a) {
  const RunLog log = load_run_log(a.run_log);
  std::map<TaskId, EpochRecord> last;
  std::vector<TaskId> order;
  std::size_t epochs = 0;
  for (const EpochRecord& r : log.records) {
    if (!last.contains(r.task)) order.push_back(r.task);
    last[r.task] = r;
    epochs = std::max(epochs, r.epoch);
  }
  std::printf("epochs: %zu\ntermination: %s\n", epochs, log.termination.c_str());
  std::printf("%-16s %14s %14s\n", "task", "train loss", "val metric");
  for (const TaskId& id : order) {
    std::printf("%-16s %14.6f %14.6f\n", id.c_str(), last[id].loss, last[id].metric);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hide, publish and recover models through a shared parameter pool"};
  app.require_subcommand(1);
  int status = 0;

  TrainHideArgs th;
  auto* train_hide = app.add_subcommand("train-hide", "Jointly train carrier and secret tasks");
  train_hide->add_option("--config", th.config)->required()->check(CLI::ExistingFile);
  train_hide->add_option("--output", th.output, "Overrides the config's output directory");
  train_hide->callback([&] { status = cmd_train_hide(th); });

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train one task of a config on its own (baseline)");
  train->add_option("--config", tr.config)->required()->check(CLI::ExistingFile);
  train->add_option("--task", tr.task)->required();
  train->add_option("--epochs", tr.epochs);
  train->add_option("--seed", tr.seed, "Initialisation seed");
  train->add_option("--out", tr.out)->required();
  train->callback([&] { status = cmd_train(tr); });

  DecodeArgs de;
  auto* decode_cmd = app.add_subcommand("decode", "Recover the pool from a carrier and a key");
  decode_cmd->add_option("--carrier", de.carrier)->required();
  decode_cmd->add_option("--key", de.key)->required();
  decode_cmd->add_option("--fusion", de.fusion)
      ->check(CLI::IsMember({"first", "first-nonzero", "median"}));
  decode_cmd->add_option("--out", de.out)->required();
  decode_cmd->callback([&] { status = cmd_decode(de); });

  AssembleArgs as;
  auto* assemble_cmd = app.add_subcommand("assemble", "Fill a secret model from a pool");
  assemble_cmd->add_option("--pool", as.pool)->required();
  assemble_cmd->add_option("--key", as.key)->required();
  assemble_cmd->add_option("--out", as.out)->required();
  assemble_cmd->callback([&] { status = cmd_assemble(as); });

  StealArgs st;
  auto* steal = app.add_subcommand("steal", "Train a standalone generator that memorizes targets");
  steal->add_option("--arch", st.arch, "Generator architecture, gen-...")->required();
  add_noise_options(steal, st.noise);
  steal->add_option("--targets", st.targets, "Targets tensor (count,height,width)");
  steal->add_option("--height", st.height);
  steal->add_option("--width", st.width);
  steal->add_option("--target-seed", st.target_seed, "Seed of the synthetic targets");
  steal->add_option("--steps", st.steps);
  steal->add_option("--lr", st.lr);
  steal->add_option("--seed", st.seed, "Initialisation seed");
  steal->add_option("--out", st.out)->required();
  steal->add_option("--targets-out", st.targets_out);
  steal->callback([&] { status = cmd_steal(st); });

  ReconstructArgs re;
  auto* recon = app.add_subcommand("reconstruct", "Replay the noise through a generator");
  recon->add_option("--model", re.model)->required();
  add_noise_options(recon, re.noise);
  recon->add_option("--targets", re.targets, "Originals, for MSE/SSIM");
  recon->add_option("--height", re.height);
  recon->add_option("--width", re.width);
  recon->add_option("--out", re.out, "Reconstruction tensor");
  recon->add_option("--pgm-dir", re.pgm_dir, "Write one PGM per reconstruction");
  recon->callback([&] { status = cmd_reconstruct(re); });

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Validation metric of a model");
  eval->add_option("--model", ev.model)->required();
  add_data_options(eval, ev.data);
  eval->add_flag("--train-split", ev.data.train_split, "Evaluate on the training split");
  eval->callback([&] { status = cmd_eval(ev); });

  PruneArgs pr;
  auto* prune = app.add_subcommand("prune", "Per-layer magnitude pruning");
  prune->add_option("--model", pr.model)->required();
  prune->add_option("--beta", pr.beta)->required();
  prune->add_option("--out", pr.out)->required();
  prune->callback([&] { status = cmd_prune(pr); });

  FinetuneArgs ft;
  auto* finetune = app.add_subcommand("finetune", "Fine-tune the last K layers");
  finetune->add_option("--model", ft.model)->required();
  add_data_options(finetune, ft.data);
  finetune->add_option("--last-k", ft.last_k);
  finetune->add_option("--steps", ft.steps);
  finetune->add_option("--batch", ft.batch);
  finetune->add_option("--lr", ft.lr);
  finetune->add_option("--optimizer", ft.optimizer)->check(CLI::IsMember({"sgd", "adam"}));
  finetune->add_option("--seed", ft.seed, "Batch shuffling seed");
  finetune->add_option("--out", ft.out)->required();
  finetune->callback([&] { status = cmd_finetune(ft); });

  OtdArgs ot;
  auto* otd_cmd = app.add_subcommand("otd", "Optimal transport distance between weight histograms");
  otd_cmd->add_option("models", ot.models, "Two or more model files")->required()->expected(2, -1);
  otd_cmd->add_option("--bins", ot.bins);
  otd_cmd->callback([&] { status = cmd_otd(ot); });

  HistogramArgs hi;
  auto* hist = app.add_subcommand("histogram", "Weight histogram as a plain-text table");
  hist->add_option("--model", hi.model)->required();
  hist->add_option("--bins", hi.bins);
  hist->callback([&] { status = cmd_histogram(hi); });

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Summarize a run log");
  report->add_option("--run-log", rp.run_log)->required();
  report->callback([&] { status = cmd_report(rp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return status;
}
