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

#include "nestpool/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "nestpool/error.hpp"
#include "nestpool/io.hpp"

namespace nestpool {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw FormatError("config line " + std::to_string(line) + ": " + msg);
}

std::uint64_t to_u64(std::string_view v, std::size_t line) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    bad(line, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    bad(line, "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view v, std::size_t line) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  bad(line, "expected 0/1, got '" + std::string(v) + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void set_task_key(TaskBlock& t, std::string_view key, std::string_view v, std::size_t line,
                  bool is_carrier) {
  if (key == "arch") {
    t.arch = std::string(v);
  } else if (key == "kind" && !is_carrier) {
    if (v == "functionality") {
      t.kind = TaskKind::functionality;
    } else if (v == "memorization") {
      t.kind = TaskKind::memorization;
    } else {
      bad(line, "secret kind must be functionality or memorization");
    }
  } else if (key == "v") {
    t.v = to_u64(v, line);
  } else if (key == "permute") {
    t.permute = to_bool(v, line);
  } else if (key == "perm_seed") {
    t.perm_seed = to_u64(v, line);
  } else if (key == "init_seed") {
    t.init_seed = to_u64(v, line);
  } else if (key == "optimizer") {
    if (v == "sgd") {
      t.optimizer.kind = OptimizerKind::sgd;
    } else if (v == "adam") {
      t.optimizer.kind = OptimizerKind::adam;
    } else {
      bad(line, "optimizer must be sgd or adam");
    }
  } else if (key == "lr") {
    t.optimizer.learning_rate = to_double(v, line);
  } else if (key == "beta1") {
    t.optimizer.beta1 = to_double(v, line);
  } else if (key == "beta2") {
    t.optimizer.beta2 = to_double(v, line);
  } else if (key == "epsilon") {
    t.optimizer.epsilon = to_double(v, line);
  } else if (key == "batch_size") {
    t.batch_size = to_u64(v, line);
  } else if (key == "weight") {
    t.weight = to_double(v, line);
  } else if (key == "baseline" && is_carrier) {
    t.baseline = to_double(v, line);
  } else if (key == "margin" && is_carrier) {
    t.margin = to_double(v, line);
  } else if (key == "noise_seed" && !is_carrier) {
    t.noise_seed = to_u64(v, line);
  } else if (key == "noise" && !is_carrier) {
    try {
      t.noise = parse_noise_kind(v);
    } catch (const Error& e) {
      bad(line, e.what());
    }
  } else if (key == "targets" && !is_carrier) {
    t.targets = to_u64(v, line);
  } else if (key == "target_height" && !is_carrier) {
    t.target_height = to_u64(v, line);
  } else if (key == "target_width" && !is_carrier) {
    t.target_width = to_u64(v, line);
  } else if (key == "target_seed" && !is_carrier) {
    t.target_seed = to_u64(v, line);
  } else {
    bad(line, "unknown key '" + std::string(key) + "'");
  }
}

void format_task(std::ostringstream& out, const TaskBlock& t, bool is_carrier) {
  if (!is_carrier) {
    out << "kind=" << to_string(t.kind) << "\n";
  }
  out << "arch=" << t.arch << "\n";
  out << "v=" << t.v << "\n";
  out << "permute=" << (t.permute ? 1 : 0) << "\n";
  out << "perm_seed=" << t.perm_seed << "\n";
  out << "init_seed=" << t.init_seed << "\n";
  out << "optimizer=" << (t.optimizer.kind == OptimizerKind::sgd ? "sgd" : "adam") << "\n";
  out << "lr=" << fmt(t.optimizer.learning_rate) << "\n";
  out << "beta1=" << fmt(t.optimizer.beta1) << "\n";
  out << "beta2=" << fmt(t.optimizer.beta2) << "\n";
  out << "epsilon=" << fmt(t.optimizer.epsilon) << "\n";
  out << "batch_size=" << t.batch_size << "\n";
  out << "weight=" << fmt(t.weight) << "\n";
  if (is_carrier) {
    if (t.baseline) out << "baseline=" << fmt(*t.baseline) << "\n";
    out << "margin=" << fmt(t.margin) << "\n";
  } else {
    if (t.noise_seed) out << "noise_seed=" << *t.noise_seed << "\n";
    out << "noise=" << to_string(t.noise) << "\n";
    out << "targets=" << t.targets << "\n";
    out << "target_height=" << t.target_height << "\n";
    out << "target_width=" << t.target_width << "\n";
    out << "target_seed=" << t.target_seed << "\n";
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  cfg.carrier.id = "carrier";
  cfg.carrier.kind = TaskKind::carrier;

  enum class Section { none, experiment, data, pool, carrier, secret };
  Section section = Section::none;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad(line_no, "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      std::string canonical(name);
      if (name == "experiment") {
        section = Section::experiment;
      } else if (name == "data") {
        section = Section::data;
      } else if (name == "pool") {
        section = Section::pool;
      } else if (name == "carrier") {
        section = Section::carrier;
      } else if (name.substr(0, 7) == "secret ") {
        section = Section::secret;
        TaskBlock t;
        t.id = std::string(trim(name.substr(7)));
        if (t.id.empty()) bad(line_no, "secret section needs an id");
        cfg.secrets.push_back(t);
      } else {
        bad(line_no, "unknown section '" + canonical + "'");
      }
      if (!seen_sections.insert(canonical).second) {
        bad(line_no, "duplicate section '" + canonical + "'");
      }
      seen_keys.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(line_no, "expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view v = trim(line.substr(eq + 1));
    if (!seen_keys.insert(std::string(key)).second) {
      bad(line_no, "duplicate key '" + std::string(key) + "'");
    }
    switch (section) {
      case Section::none:
        bad(line_no, "key outside of any section");
      case Section::experiment:
        if (key == "output") {
          cfg.output_dir = std::string(v);
        } else if (key == "seed") {
          cfg.train.seed = to_u64(v, line_no);
        } else if (key == "max_epochs") {
          cfg.train.max_epochs = to_u64(v, line_no);
        } else if (key == "batch_size") {
          cfg.train.batch_size = to_u64(v, line_no);
        } else if (key == "validation_fraction") {
          cfg.train.validation_fraction = to_double(v, line_no);
        } else if (key == "convergence_window") {
          cfg.train.convergence_window = to_u64(v, line_no);
        } else if (key == "convergence_tolerance") {
          cfg.train.convergence_tolerance = to_double(v, line_no);
        } else if (key == "iterations_per_epoch") {
          cfg.train.iterations_per_epoch = to_u64(v, line_no);
        } else {
          bad(line_no, "unknown key '" + std::string(key) + "'");
        }
        break;
      case Section::data:
        if (key == "source") {
          if (v != "synthetic" && v != "idx") bad(line_no, "source must be synthetic or idx");
          cfg.data.source = std::string(v);
        } else if (key == "dir") {
          cfg.data.dir = std::string(v);
        } else if (key == "samples") {
          cfg.data.samples = to_u64(v, line_no);
        } else if (key == "seed") {
          cfg.data.seed = to_u64(v, line_no);
        } else {
          bad(line_no, "unknown key '" + std::string(key) + "'");
        }
        break;
      case Section::pool:
        if (key == "mode") {
          if (v == "from-model") {
            cfg.pool.mode = PoolMode::from_model;
          } else if (v == "from-scratch") {
            cfg.pool.mode = PoolMode::from_scratch;
          } else {
            bad(line_no, "pool mode must be from-model or from-scratch");
          }
        } else if (key == "sizes") {
          try {
            cfg.pool.sizes = parse_counts(v);
          } catch (const Error& e) {
            bad(line_no, e.what());
          }
        } else if (key == "seed") {
          cfg.pool.seed = to_u64(v, line_no);
        } else if (key == "weight_std") {
          cfg.pool.weight_std = to_double(v, line_no);
        } else {
          bad(line_no, "unknown key '" + std::string(key) + "'");
        }
        break;
      case Section::carrier:
        set_task_key(cfg.carrier, key, v, line_no, true);
        break;
      case Section::secret:
        set_task_key(cfg.secrets.back(), key, v, line_no, false);
        break;
    }
  }
  if (!seen_sections.contains("carrier")) throw FormatError("config has no [carrier] section");
  return cfg;
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "output=" << cfg.output_dir.string() << "\n";
  out << "seed=" << cfg.train.seed << "\n";
  out << "max_epochs=" << cfg.train.max_epochs << "\n";
  out << "batch_size=" << cfg.train.batch_size << "\n";
  out << "validation_fraction=" << fmt(cfg.train.validation_fraction) << "\n";
  out << "convergence_window=" << cfg.train.convergence_window << "\n";
  out << "convergence_tolerance=" << fmt(cfg.train.convergence_tolerance) << "\n";
  out << "iterations_per_epoch=" << cfg.train.iterations_per_epoch << "\n";
  out << "\n[data]\n";
  out << "source=" << cfg.data.source << "\n";
  if (!cfg.data.dir.empty()) out << "dir=" << cfg.data.dir.string() << "\n";
  out << "samples=" << cfg.data.samples << "\n";
  out << "seed=" << cfg.data.seed << "\n";
  out << "\n[pool]\n";
  out << "mode=" << (cfg.pool.mode == PoolMode::from_model ? "from-model" : "from-scratch") << "\n";
  out << "sizes=" << format_counts(cfg.pool.sizes) << "\n";
  out << "seed=" << cfg.pool.seed << "\n";
  out << "weight_std=" << fmt(cfg.pool.weight_std) << "\n";
  out << "\n[carrier]\n";
  format_task(out, cfg.carrier, true);
  for (const TaskBlock& t : cfg.secrets) {
    out << "\n[secret " << t.id << "]\n";
    format_task(out, t, false);
  }
  return out.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.train);
  std::set<TaskId> ids{cfg.carrier.id};
  const auto check_task = [&](const TaskBlock& t) {
    if (t.arch.empty()) throw InvalidArgument("task '" + t.id + "' has no arch");
    const ModelSpec spec = parse_architecture(t.arch);
    if (t.kind == TaskKind::memorization) {
      if (!t.noise_seed) throw InvalidArgument("memorization task '" + t.id + "' needs noise_seed");
      if (spec.output_dim() != t.target_height * t.target_width) {
        throw InvalidArgument("task '" + t.id + "': generator output does not match target shape");
      }
      if (t.targets == 0) throw InvalidArgument("task '" + t.id + "' needs at least one target");
    } else if (spec.loss != LossKind::cross_entropy) {
      throw InvalidArgument("task '" + t.id + "' needs a classifier architecture");
    }
  };
  check_task(cfg.carrier);
  for (const TaskBlock& t : cfg.secrets) {
    if (!ids.insert(t.id).second) throw InvalidArgument("duplicate task id '" + t.id + "'");
    check_task(t);
  }
  if (cfg.pool.mode == PoolMode::from_model && cfg.carrier.v != 0) {
    throw InvalidArgument("a pool initialised from the carrier requires carrier v = 0");
  }
  if (cfg.pool.mode == PoolMode::from_scratch && cfg.pool.sizes[ParamKind::weight] == 0) {
    throw InvalidArgument("from-scratch pool needs a non-empty weight group");
  }
  if (cfg.data.source == "idx" && cfg.data.dir.empty()) {
    throw InvalidArgument("idx data source needs a dir");
  }
}

}  // namespace nestpool
