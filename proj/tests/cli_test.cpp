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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "nestpool/dataset.hpp"
#include "nestpool/io.hpp"

namespace nestpool {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int exit_code = -1;
  std::string output;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(NESTPOOL_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.output.append(buf.data(), n);
  const int status = pclose(pipe);
  o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nestpool_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
  EXPECT_EQ(run("prune --model x.mtrk").exit_code, 2);
  EXPECT_EQ(run("decode --carrier a --key b --out c --fusion mean").exit_code, 2);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").exit_code, 0); }

TEST_F(Cli, DataErrorsExitThree) {
  EXPECT_EQ(run("prune --model " + path("missing.mtrk") + " --beta 0.3 --out " + path("o.mtrk"))
                .exit_code,
            3);
  write_file(path("junk.mtrk"), "MTRK1 definitely not a checkpoint");
  EXPECT_EQ(run("histogram --model " + path("junk.mtrk")).exit_code, 3);
  write_file(path("bad.key"), "v=1\n");
  save_pool(ParamPool::from_scratch({{10, 2, 0}}, 1), path("p.mtrk"));
  EXPECT_EQ(run("assemble --pool " + path("p.mtrk") + " --key " + path("bad.key") + " --out " +
                path("o.mtrk"))
                .exit_code,
            3);
}

TEST_F(Cli, PruneBetaZeroIsByteIdentical) {
  save_model(init_params(parse_architecture("fcn-6-5-3"), 2), path("m.mtrk"));
  ASSERT_EQ(run("prune --model " + path("m.mtrk") + " --beta 0 --out " + path("p.mtrk")).exit_code,
            0);
  EXPECT_EQ(read_file(path("p.mtrk")), read_file(path("m.mtrk")));
  EXPECT_EQ(run("prune --model " + path("m.mtrk") + " --beta 1.5 --out " + path("q.mtrk")).exit_code,
            2);
}

TEST_F(Cli, OtdOfAModelWithItselfIsZero) {
  save_model(init_params(parse_architecture("fcn-6-5-3"), 2), path("m.mtrk"));
  save_model(init_params(parse_architecture("fcn-6-5-3"), 3), path("n.mtrk"));
  const Outcome self = run("otd " + path("m.mtrk") + " " + path("m.mtrk"));
  ASSERT_EQ(self.exit_code, 0) << self.output;
  EXPECT_EQ(self.output, "0\n");
  const Outcome three = run("otd " + path("m.mtrk") + " " + path("n.mtrk") + " " + path("m.mtrk"));
  ASSERT_EQ(three.exit_code, 0) << three.output;
  EXPECT_NE(three.output.find("mean"), std::string::npos);
}

TEST_F(Cli, EvalOfAPerfectClassifier) {
  // Label 0 iff the first pixel is brighter than the second.
  Dataset ds;
  ds.inputs.resize(50, 4);
  for (int i = 0; i < 50; ++i) {
    const double a = (i * 37 % 251) / 255.0;
    const double b = (i * 91 % 247 + 1) / 255.0;
    ds.inputs.row(i) << a, b, 0.5, 0.25;
    ds.labels.push_back(a > b ? 0 : 1);
  }
  write_idx(ds, 2, 2, path("img"), path("lbl"));
  Model m = zeros_like(parse_architecture("fcn-4-2"));
  m.weights() = {1, -1, 0, 0, -1, 1, 0, 0};
  save_model(m, path("m.mtrk"));
  const Outcome o =
      run("eval --model " + path("m.mtrk") + " --images " + path("img") + " --labels " + path("lbl"));
  ASSERT_EQ(o.exit_code, 0) << o.output;
  EXPECT_EQ(o.output, "ACC 1.000000\n");
}

TEST_F(Cli, SmokePipeline) {
  const std::string config = NESTPOOL_SOURCE_DIR "/tests/data/smoke.ini";
  const Outcome first = run("train-hide --config " + config + " --output " + path("a"));
  ASSERT_EQ(first.exit_code, 0) << first.output;
  const Outcome second = run("train-hide --config " + config + " --output " + path("b"));
  ASSERT_EQ(second.exit_code, 0) << second.output;

  for (const char* f : {"carrier.mtrk", "carrier.key", "pool.mtrk", "run_log.jsonl",
                        "keys/perm.key", "keys/mem.key", "targets/mem.mtrk"}) {
    ASSERT_TRUE(fs::exists(path("a/") + f)) << f;
    EXPECT_EQ(read_file(path("a/") + f), read_file(path("b/") + f)) << f;
  }
  std::size_t key_files = 0;
  for (const auto& e : fs::directory_iterator(path("a/keys"))) key_files += e.is_regular_file();
  EXPECT_EQ(key_files, 2u);

  const Outcome dec = run("decode --carrier " + path("a/carrier.mtrk") + " --key " +
                          path("a/carrier.key") + " --out " + path("pool.mtrk"));
  ASSERT_EQ(dec.exit_code, 0) << dec.output;
  EXPECT_EQ(read_file(path("pool.mtrk")), read_file(path("a/pool.mtrk")));

  const Outcome as = run("assemble --pool " + path("pool.mtrk") + " --key " +
                         path("a/keys/mem.key") + " --out " + path("mem.mtrk"));
  ASSERT_EQ(as.exit_code, 0) << as.output;
  const SecretKey key = load_key(path("a/keys/mem.key"));
  const Outcome rec = run("reconstruct --model " + path("mem.mtrk") + " --noise-seed " +
                          std::to_string(*key.noise_seed) + " --count 4 --targets " +
                          path("a/targets/mem.mtrk") + " --pgm-dir " + path("pgm"));
  ASSERT_EQ(rec.exit_code, 0) << rec.output;
  EXPECT_NE(rec.output.find("SSIM"), std::string::npos) << rec.output;
  EXPECT_TRUE(fs::exists(path("pgm/recon_000.pgm")));

  const Outcome ev = run("eval --model " + path("a/carrier.mtrk") + " --config " + config);
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  EXPECT_EQ(ev.output.rfind("ACC ", 0), 0u) << ev.output;

  const Outcome rep = run("report --run-log " + path("a/run_log.jsonl"));
  ASSERT_EQ(rep.exit_code, 0) << rep.output;
  EXPECT_NE(rep.output.find("carrier"), std::string::npos);
}

}  // namespace
}  // namespace nestpool
