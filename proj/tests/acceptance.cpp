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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "nestpool/analysis.hpp"
#include "nestpool/config.hpp"
#include "nestpool/error.hpp"
#include "nestpool/hiding_trainer.hpp"
#include "nestpool/param_pool.hpp"
#include "nestpool/pipeline.hpp"
#include "nestpool/postprocess.hpp"
#include "nestpool/random.hpp"
#include "nestpool/stealing.hpp"
#include "transport_lp.hpp"

namespace nestpool {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bit_equal(const ParamPool& a, const ParamPool& b) {
  for (ParamKind k : kParamKinds) {
    if (!bit_equal(a.group(k), b.group(k))) return false;
  }
  return true;
}

// ---- 1: lossless channel ----------------------------------------------------

ModelSpec random_spec(CounterRng& rng) {
  static const char* families[] = {"fcn", "reg", "gen"};
  const std::string family = families[rng.below(3)];
  std::vector<std::size_t> sizes;
  const std::size_t layers = 1 + rng.below(3);
  for (std::size_t i = 0; i <= layers; ++i) sizes.push_back(2 + rng.below(30));
  return parse_architecture(make_arch_id(family, sizes));
}

Verdict lossless_channel() {
  CounterRng rng(1, 100);
  const FusionStrategy fusions[] = {FusionStrategy::first, FusionStrategy::first_nonzero,
                                    FusionStrategy::median};
  std::size_t trials = 0, direct = 0, exact = 0;
  for (; trials < 150; ++trials) {
    const ModelSpec spec = random_spec(rng);
    const KindCounts n = spec.param_counts();
    SecretKey key;
    key.arch_id = spec.arch_id;
    if (rng.below(4) == 0) {
      // Option I: the pool is the carrier's own parameter arrays.
      key.pool_sizes = n;
      const ParamPool pool = ParamPool::from_scratch(n, 500 + trials, 1.0);
      const Model carrier = fill(pool, spec, key);
      ++direct;
      exact += is_direct_layout(spec, key) && bit_equal(decode_direct(carrier), pool) &&
               bit_equal(decode(carrier, key, FusionStrategy::first_nonzero), pool);
      continue;
    }
    // Option II: a shorter pool, repeated (and possibly permuted) in the carrier.
    for (ParamKind k : kParamKinds) key.pool_sizes[k] = n[k] == 0 ? 0 : 1 + rng.below(n[k]);
    key.v = rng.next_u64() >> 20;
    key.permute = rng.below(2) == 1;
    const ParamPool pool = ParamPool::from_scratch(key.pool_sizes, 500 + trials, 1.0);
    const Model carrier = fill(pool, spec, key);
    exact += bit_equal(decode_segmented(carrier, key, fusions[rng.below(3)]), pool);
  }
  return {exact == trials,
          fmt("%zu/%zu random layouts decode bit-exactly (%zu direct, %zu segmented)", exact,
              trials, direct, trials - direct)};
}

// ---- 2: training-equivalence oracle -----------------------------------------

Verdict training_equivalence() {
  const DataSplit split = split_dataset(synthetic_blobs(2000, 3), 0.1, 3);
  const ModelSpec spec = parse_architecture("fcn-784-200-200-10");
  SecretKey key;
  key.arch_id = spec.arch_id;
  key.pool_sizes = spec.param_counts();
  TaskSpec task = make_permuted_mnist_task(split, kIdentityPermutation, spec, key, "carrier");
  task.kind = TaskKind::carrier;
  TrainConfig cfg;
  cfg.seed = 3;
  const Model init = init_params(spec, 5);

  JointTrainer joint({task}, ParamPool::from_model(init), cfg);
  DirectTrainer direct(init, task, cfg);
  constexpr int kSteps = 250;
  double worst = 0.0;
  for (int step = 0; step < kSteps; ++step) {
    joint.step();
    direct.step();
    const Model hidden = joint.model("carrier");
    for (ParamKind k : kParamKinds) {
      for (std::size_t i = 0; i < hidden.params[k].size(); ++i) {
        worst = std::max(worst, std::abs(hidden.params[k][i] - direct.model().params[k][i]));
      }
    }
  }
  return {worst <= 1e-12,
          fmt("%d steps of fcn-784-200-200-10, max per-scalar deviation %.3g (limit 1e-12)", kSteps,
              worst)};
}

// ---- 3: gradient oracle -----------------------------------------------------

std::vector<bool> relu_pattern(const Model& m, const Matrix& inputs) {
  const ForwardTrace t = forward_trace(m, inputs);
  std::vector<bool> out;
  for (std::size_t l = 0; l + 1 < t.pre_activations.size(); ++l) {
    const Matrix& z = t.pre_activations[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z.data()[i] > 0.0);
  }
  return out;
}

Batch probe_batch(const ModelSpec& spec, CounterRng& rng, std::size_t rows) {
  Batch b;
  b.inputs.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(spec.input_dim()));
  for (Eigen::Index i = 0; i < b.inputs.size(); ++i) b.inputs.data()[i] = rng.normal();
  if (spec.loss == LossKind::cross_entropy) {
    for (std::size_t r = 0; r < rows; ++r) {
      b.labels.push_back(static_cast<int>(rng.below(spec.output_dim())));
    }
  } else {
    b.targets.resize(static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(spec.output_dim()));
    for (Eigen::Index i = 0; i < b.targets.size(); ++i) b.targets.data()[i] = rng.uniform();
  }
  return b;
}

Verdict gradient_oracle() {
  CounterRng rng(3, 300);
  const char* archs[] = {"fcn-12-16-10-5", "reg-8-10-6-3", "gen-6-12-16", "fcn-784-200-200-10"};
  constexpr double kStep = 1e-5;
  constexpr double kFloor = 1e-5;  // below this magnitude the error is judged absolutely
  std::size_t probes = 0, resampled = 0, bad = 0;
  double worst = 0.0;
  for (const char* arch : archs) {
    const ModelSpec spec = parse_architecture(arch);
    const Model model = init_params(spec, 9);
    const Batch batch = probe_batch(spec, rng, 8);
    const LossAndGrad lg = loss_and_grad(model, batch);
    const std::vector<bool> pattern = relu_pattern(model, batch.inputs);
    const KindCounts n = spec.param_counts();
    for (std::size_t accepted = 0; accepted < 300;) {
      const ParamKind kind = rng.below(2) == 0 ? ParamKind::weight : ParamKind::bias;
      const std::size_t i = rng.below(n[kind]);
      Model plus = model;
      Model minus = model;
      plus.params[kind][i] += kStep;
      minus.params[kind][i] -= kStep;
      if (relu_pattern(plus, batch.inputs) != pattern ||
          relu_pattern(minus, batch.inputs) != pattern) {
        ++resampled;
        continue;
      }
      const double numeric = (loss_value(plus, batch) - loss_value(minus, batch)) / (2 * kStep);
      const double analytic = lg.grads[kind][i];
      const double rel = std::abs(numeric - analytic) /
                         std::max({std::abs(numeric), std::abs(analytic), kFloor});
      worst = std::max(worst, rel);
      bad += rel >= 1e-4;
      ++accepted;
      ++probes;
    }
  }
  return {bad == 0 && probes >= 1000,
          fmt("%zu probes over 4 architectures, max relative error %.3g (limit 1e-4), %zu "
              "resampled for ReLU flips",
              probes, worst, resampled)};
}

// ---- shared helpers for the training criteria -------------------------------

Model hidden_secret(const Model& carrier, const HideResult& r, const ExperimentConfig& cfg,
                    const TaskId& id) {
  const SecretKey carrier_key = make_key(cfg.carrier, resolve_pool_sizes(cfg));
  const ParamPool pool = decode(carrier, carrier_key, FusionStrategy::first_nonzero);
  for (const TaskSpec& t : r.tasks) {
    if (t.id == id) return assemble(pool, t.key);
  }
  throw InvalidArgument("no task " + id);
}

const TaskSpec& task_of(const HideResult& r, const TaskId& id) {
  for (const TaskSpec& t : r.tasks) {
    if (t.id == id) return t;
  }
  throw InvalidArgument("no task " + id);
}

Model baseline_for(const ExperimentConfig& cfg, const TaskSpec& task, std::size_t index) {
  const std::uint64_t seed = task.kind == TaskKind::carrier ? cfg.carrier.init_seed : 1000 + index;
  return train_independent(task, cfg.train, cfg.train.max_epochs, seed);
}

struct Comparison {
  TaskId id;
  double hidden = 0.0;
  double baseline = 0.0;
};

std::vector<Comparison> compare_with_baselines(const ExperimentConfig& cfg, const HideResult& r,
                                               std::vector<Model>* models = nullptr) {
  std::vector<Comparison> out;
  for (std::size_t i = 0; i < r.tasks.size(); ++i) {
    const TaskSpec& t = r.tasks[i];
    const Model hidden = t.kind == TaskKind::carrier ? r.carrier : hidden_secret(r.carrier, r, cfg, t.id);
    const Model base = baseline_for(cfg, t, i);
    out.push_back({t.id, evaluate(hidden, t.validation, t.metric()),
                   evaluate(base, t.validation, t.metric())});
    if (models != nullptr) {
      models->push_back(hidden);
      models->push_back(base);
    }
  }
  return out;
}

std::string describe(const std::vector<Comparison>& cs) {
  std::string s;
  for (const Comparison& c : cs) {
    if (!s.empty()) s += ", ";
    s += fmt("%s %.3f vs %.3f", c.id.c_str(), c.hidden, c.baseline);
  }
  return s;
}

bool within(const std::vector<Comparison>& cs, double points) {
  return std::all_of(cs.begin(), cs.end(), [&](const Comparison& c) {
    return std::abs(delta_perf(c.hidden, c.baseline)) <= points / 100.0;
  });
}

// ---- 4: desk-scale hiding ---------------------------------------------------

Verdict desk_scale(const std::string& source_dir, std::vector<Model>& models) {
  const ExperimentConfig cfg = load_config(source_dir + "/configs/demo.ini");
  const HideResult r = run_hide(cfg);
  const std::vector<Comparison> cs = compare_with_baselines(cfg, r, &models);
  return {cs.size() == 3 && within(cs, 3.0),
          fmt("hidden vs baseline ACC: %s (limit 3 points; %s)", describe(cs).c_str(),
              r.log.termination.c_str())};
}

// ---- 5 and 6: capacity and pruning ------------------------------------------

struct CapacityRun {
  ExperimentConfig cfg;
  HideResult result;
};

Verdict capacity(const CapacityRun& run) {
  const std::vector<Comparison> cs = compare_with_baselines(run.cfg, run.result);
  const KindCounts pool = resolve_pool_sizes(run.cfg);
  const KindCounts carrier = parse_architecture(run.cfg.carrier.arch).param_counts();
  const double gamma = static_cast<double>(pool[ParamKind::weight]) /
                       static_cast<double>(carrier[ParamKind::weight]);
  return {std::abs(gamma - 0.2) < 1e-12 && cs.size() == 2 && within(cs, 5.0),
          fmt("pool at %.2f of the carrier weights; hidden vs baseline ACC: %s (limit 5 points)",
              gamma, describe(cs).c_str())};
}

Verdict pruning(const CapacityRun& run) {
  const HideResult& r = run.result;
  const TaskSpec& carrier_task = r.tasks.front();
  const TaskId secret_id = run.cfg.secrets.front().id;
  const TaskSpec& secret_task = task_of(r, secret_id);
  const KindCounts pool = resolve_pool_sizes(run.cfg);
  const std::size_t copies = carrier_task.spec.param_counts()[ParamKind::weight] /
                             pool[ParamKind::weight];

  const Model pruned = prune_weights(r.carrier, 0.3);
  const double carrier_before = evaluate(r.carrier, carrier_task.validation, Metric::acc);
  const double carrier_after = evaluate(pruned, carrier_task.validation, Metric::acc);
  const double secret_before =
      evaluate(hidden_secret(r.carrier, r, run.cfg, secret_id), secret_task.validation, Metric::acc);
  const double secret_after =
      evaluate(hidden_secret(pruned, r, run.cfg, secret_id), secret_task.validation, Metric::acc);
  const bool pass = copies >= 2 && std::abs(secret_after - secret_before) <= 0.03 &&
                    carrier_before - carrier_after >= 0.03;
  return {pass, fmt("%zu pool copies; after pruning 0.3 the secret goes %.3f -> %.3f (limit 3 "
                    "points), the carrier %.3f -> %.3f (needs >= 3 points drop)",
                    copies, secret_before, secret_after, carrier_before, carrier_after)};
}

// ---- 7: memorization stealing -----------------------------------------------

Verdict memorization(const std::string& source_dir) {
  const ExperimentConfig cfg = load_config(source_dir + "/configs/memorization.ini");
  const TaskBlock& block = cfg.secrets.front();
  const StealTarget targets = block_targets(block);
  const NoiseSpec noise = block_noise(block);
  const ModelSpec gen = parse_architecture(block.arch);

  // Standalone overfit first: the thresholds must be reachable at all.
  const TaskSpec solo = build_memorization_task(targets, noise, gen, {}, block.id, block.optimizer);
  DirectTrainer trainer(init_params(gen, 1), solo, cfg.train);
  for (int i = 0; i < 2000; ++i) trainer.step();
  const ReconstructionQuality standalone =
      reconstruction_quality(reconstruct(trainer.model(), noise), targets.samples);
  const bool standalone_ok = standalone.mean_mse < 1e-2 && standalone.mean_ssim > 0.95;

  const HideResult r = run_hide(cfg);
  const SecretKey carrier_key = make_key(cfg.carrier, resolve_pool_sizes(cfg));
  const TaskSpec& task = task_of(r, block.id);
  const ParamPool decoded = decode(r.carrier, carrier_key, FusionStrategy::first_nonzero);
  const Model stolen = assemble(decoded, task.key);
  NoiseSpec colluder = noise;
  colluder.seed = *task.key.noise_seed;
  const Matrix recon = reconstruct(stolen, colluder);
  const ReconstructionQuality q = reconstruction_quality(recon, targets.samples);

  NoiseSpec wrong = colluder;
  wrong.seed += 1;
  const ReconstructionQuality qw = reconstruction_quality(reconstruct(stolen, wrong), targets.samples);

  // The channel is lossless: same outputs as the generator before publishing.
  const bool lossless = recon == reconstruct(fill(r.pool, gen, task.key), noise);

  const bool pass = standalone_ok && lossless && q.mean_mse < 1e-2 && q.mean_ssim > 0.95 &&
                    q.mean_ssim - qw.mean_ssim >= 0.2;
  return {pass, fmt("standalone MSE %.2e SSIM %.4f; stolen MSE %.2e SSIM %.4f (limits 1e-2, "
                    "0.95); wrong seed SSIM %.4f (needs drop >= 0.2); lossless %s",
                    standalone.mean_mse, standalone.mean_ssim, q.mean_mse, q.mean_ssim,
                    qw.mean_ssim, lossless ? "yes" : "no")};
}

// ---- 8: OTD correctness -----------------------------------------------------

std::vector<double> random_masses(CounterRng& rng, std::size_t n) {
  std::vector<double> m(n);
  double total = 0.0;
  for (double& x : m) {
    x = rng.uniform() < 0.25 ? 0.0 : rng.uniform();
    total += x;
  }
  if (total == 0.0) {
    m[rng.below(n)] = 1.0;
    total = 1.0;
  }
  for (double& x : m) x /= total;
  return m;
}

WeightHistogram histogram_of(std::vector<double> masses) {
  WeightHistogram h;
  h.masses = std::move(masses);
  return h;
}

Verdict otd_correctness(const std::vector<Model>& trained) {
  CounterRng rng(8, 800);
  const std::size_t sizes[] = {2, 10, 100};
  double worst_lp = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const std::size_t n = sizes[pair % 3];
    const std::vector<double> p = random_masses(rng, n);
    const std::vector<double> q = random_masses(rng, n);
    worst_lp = std::max(worst_lp, std::abs(testing::transport_lp(p, q) -
                                           otd(histogram_of(p), histogram_of(q))));
  }

  double worst_axiom = 0.0;
  bool identity = true;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = sizes[t % 3];
    const WeightHistogram a = histogram_of(random_masses(rng, n));
    const WeightHistogram b = histogram_of(random_masses(rng, n));
    const WeightHistogram c = histogram_of(random_masses(rng, n));
    identity = identity && otd(a, a) == 0.0 && (a.masses == b.masses || otd(a, b) > 0.0);
    worst_axiom = std::max(worst_axiom, std::abs(otd(a, b) - otd(b, a)));
    worst_axiom = std::max(worst_axiom, otd(a, c) - otd(a, b) - otd(b, c));
  }

  std::string reference = "no trained models";
  if (trained.size() >= 2) {
    const OffDiagonalStats st = off_diagonal_stats(pairwise_otd(trained));
    reference = fmt("%.4f +- %.4f over %zu trained models (reference 0.038 +- 0.008)",
                    st.mean, st.stddev, trained.size());
  }
  return {worst_lp <= 1e-9 && worst_axiom <= 1e-9 && identity,
          fmt("LP vs closed form max gap %.3g on 100 pairs; axiom slack %.3g on 200 triples; "
              "reference OTD %s",
              worst_lp, worst_axiom, reference.c_str())};
}

// ---- 9: metric examples -----------------------------------------------------

Verdict metric_examples() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* name) {
    if (!ok) failed.emplace_back(name);
  };

  // ACC: a perfect classifier on 10 samples.
  {
    Model m = zeros_like(parse_architecture("fcn-2-2"));
    m.weights() = {1, -1, -1, 1};
    Dataset d;
    d.inputs.resize(10, 2);
    for (int i = 0; i < 10; ++i) {
      d.inputs.row(i) << (i % 2 == 0 ? 1.0 : 0.0), (i % 2 == 0 ? 0.0 : 1.0);
      d.labels.push_back(i % 2);
    }
    check(evaluate(m, d, Metric::acc) == 1.0, "perfect ACC");
  }
  // ACC: a random 10-class classifier is right about a tenth of the time.
  {
    const Model m = init_params(parse_architecture("fcn-20-10"), 4);
    Dataset d;
    CounterRng rng(9, 9);
    d.inputs.resize(20000, 20);
    for (Eigen::Index i = 0; i < d.inputs.size(); ++i) d.inputs.data()[i] = rng.normal();
    for (int i = 0; i < 20000; ++i) d.labels.push_back(i % 10);
    check(std::abs(evaluate(m, d, Metric::acc) - 0.1) <= 0.03, "random ACC");
  }
  // MSE: f(x) - y = (3, 4) over dim 2 is 2.5.
  {
    Model m = zeros_like(parse_architecture("reg-1-2"));
    m.biases() = {3, 4};
    Dataset d;
    d.inputs = Matrix::Zero(1, 1);
    d.targets = Matrix::Zero(1, 2);
    check(evaluate(m, d, Metric::mse) == 2.5, "evaluate MSE");
    const std::vector<double> diff{3, 4}, zero{0, 0};
    check(mse_sample(diff, diff) == 0.0, "mse identity");
    check(mse_sample(diff, zero) == 2.5, "mse (3,4)");
    const std::vector<double> eps(16, 0.01), none(16, 0.0);
    check(std::abs(mse_sample(eps, none) - 0.01 / 4.0) < 1e-15, "mse eps/sqrt(n)");
  }
  // SSIM.
  {
    const std::vector<double> x{0.1, 0.7, 0.4, 0.9, 0.2};
    check(std::abs(ssim(x, x) - 1.0) < 1e-15, "ssim identity");
    const std::vector<double> zeros(64, 0.0), ones(64, 1.0);
    check(std::abs(ssim(ones, zeros) - 1e-4 / (1 + 1e-4)) < 1e-15, "ssim constants");
    CounterRng rng(10, 10);
    std::vector<double> a(64), b(64);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform();
      b[i] = a[i] + 1e-4 * rng.normal();
    }
    check(ssim(b, a) > 0.99, "ssim tiny noise");
  }
  // Delta perf.
  check(std::abs(delta_perf(0.942, 0.951) + 0.009) < 1e-12, "delta_perf degradation");
  check(delta_perf(0.5, 0.5) == 0.0, "delta_perf equal");
  check(std::abs(delta_perf(0.90, 0.85) - 0.05) < 1e-12, "delta_perf gain");
  // Pruning.
  {
    Model m = zeros_like(parse_architecture("reg-4-1"));
    m.weights() = {0.1, -0.05, 0.3, 0.02};
    check(prune_weights(m, 0.5).weights() == std::vector<double>{0.1, 0, 0.3, 0}, "prune example");
    check(prune_weights(m, 0.0) == m, "prune beta 0");
    const Model all = prune_weights(m, 1.0);
    check(std::all_of(all.weights().begin(), all.weights().end(), [](double w) { return w == 0.0; }),
          "prune beta 1");
    const Model big = init_params(parse_architecture("fcn-30-20-10"), 3);
    const Model p = prune_weights(big, 0.3);
    check(std::count(p.weights().begin(), p.weights().end(), 0.0) == 180 + 60, "prune counts");
  }

  std::string detail = failed.empty() ? "ACC, MSE, SSIM, delta-perf and pruning examples hold"
                                      : "failed:";
  for (const std::string& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

int run_all(const std::string& source_dir) {
  int failures = 0;
  auto report = [&](int number, const std::function<Verdict()>& criterion) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criterion();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    std::printf("CRITERION %d %s: %s [%.1f s]\n", number, v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), seconds);
    std::fflush(stdout);
  };

  std::vector<Model> trained;
  report(1, lossless_channel);
  report(2, training_equivalence);
  report(3, gradient_oracle);
  report(4, [&] { return desk_scale(source_dir, trained); });

  CapacityRun capacity_run;
  std::string capacity_error;
  try {
    capacity_run.cfg = load_config(source_dir + "/configs/capacity.ini");
    capacity_run.result = run_hide(capacity_run.cfg);
  } catch (const std::exception& e) {
    capacity_error = e.what();
  }
  auto needs_run = [&](Verdict (*criterion)(const CapacityRun&)) {
    return [&, criterion] {
      if (!capacity_error.empty()) return Verdict{false, "error: " + capacity_error};
      return criterion(capacity_run);
    };
  };
  report(5, needs_run(capacity));
  report(6, needs_run(pruning));
  report(7, [&] { return memorization(source_dir); });
  report(8, [&] { return otd_correctness(trained); });
  report(9, metric_examples);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace nestpool

int main(int argc, char** argv) {
  const std::string source_dir = argc > 1 ? argv[1] : NESTPOOL_SOURCE_DIR;
  return nestpool::run_all(source_dir);
}
