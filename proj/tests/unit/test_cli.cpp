/* Copyright 2026 The RFS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "rfs_cli/cli.hpp"

namespace rfs {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult rfs(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Small enough to train in about a second.
const std::vector<std::string> kSmall = {
    "--set", "data.num_seen=3",        "--set", "data.num_unseen=2",     "--set", "data.d_f=8",
    "--set", "data.d_w=4",             "--set", "data.samples_per_class_train=40",
    "--set", "data.samples_per_class_test=20", "--set", "data.background_count=40",
    "--set", "train.epochs=2",         "--set", "train.hidden_dim=16",   "--set", "train.synth_per_class=30"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

TEST(Cli, GenDataWritesManifestDeterministically) {
  testing::TempDir dir("cli");
  const auto a = dir.path() / "a", b = dir.path() / "b";
  const CliResult r = rfs({"gen-data", "--out", a.string(), "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(rfs({"gen-data", "--out", b.string(), "--seed", "4"}).code, 0);
  const std::string manifest = testing::read_file(a / "manifest.txt");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const std::string name = e.path().filename().string();
    ++files;
    EXPECT_EQ(testing::read_file(e.path()), testing::read_file(b / name)) << name;
    if (name != "manifest.txt") EXPECT_NE(manifest.find(name), std::string::npos) << name;
  }
  EXPECT_GE(files, 9u);
  EXPECT_NE(r.out.find("manifest.txt"), std::string::npos);
}

TEST(Cli, BadConfigKeyIsNamed) {
  testing::TempDir dir("cli");
  std::ofstream(dir.path() / "bad.cfg") << "data.num_seen = 4\ntrain.lerning_rate = 1\n";
  const CliResult r = rfs({"gen-data", "--config", (dir.path() / "bad.cfg").string(), "--out", (dir.path() / "o").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("train.lerning_rate"), std::string::npos) << r.err;
  const CliResult s = rfs({"gen-data", "--set", "loss.nope=1", "--out", (dir.path() / "o").string()});
  EXPECT_EQ(s.code, cli::kUsage);
  EXPECT_NE(s.err.find("loss.nope"), std::string::npos) << s.err;
}

TEST(Cli, UnwritableOutputFails) {
  testing::TempDir dir("cli");
  std::ofstream(dir.path() / "file") << "x";
  const CliResult r = rfs({"gen-data", "--out", (dir.path() / "file" / "sub").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, TrainEvalRoundTrip) {
  testing::TempDir dir("cli");
  const auto data = dir.path() / "data", run = dir.path() / "run", run2 = dir.path() / "run2";
  ASSERT_EQ(rfs(with({"gen-data", "--out", data.string()}, kSmall)).code, 0);
  const CliResult t = rfs(with({"train", "--data", data.string(), "--out", run.string()}, kSmall));
  ASSERT_EQ(t.code, 0) << t.err;
  ASSERT_EQ(rfs(with({"train", "--data", data.string(), "--out", run2.string()}, kSmall)).code, 0);
  const std::string log = testing::read_file(run / "train_log.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')), "epoch,critic_loss,adv,l_cs,l_sd,l_sp,total");
  EXPECT_EQ(log, testing::read_file(run2 / "train_log.csv"));
  EXPECT_EQ(testing::read_file(run / "checkpoint.rfsc"), testing::read_file(run2 / "checkpoint.rfsc"));

  const auto ev = dir.path() / "eval";
  const CliResult e = rfs(with({"eval", "--checkpoint", (run / "checkpoint.rfsc").string(), "--data", data.string(),
                          "--mode", "zsd", "--out", ev.string()}, kSmall));
  ASSERT_EQ(e.code, 0) << e.err;
  const std::string report = testing::read_file(ev / "report.csv");
  EXPECT_NE(report.find("metric,mode,zsd"), std::string::npos);
  // ZSD restricts the test set and logit space to the unseen classes (+ background).
  EXPECT_EQ(report.find("class,0,"), std::string::npos);
  EXPECT_NE(report.find("class,3,"), std::string::npos);
  EXPECT_EQ(report.find("->0,"), std::string::npos);

  std::istringstream pca(testing::read_file(ev / "features_pca.csv"));
  std::string line;
  std::getline(pca, line);
  EXPECT_EQ(line, "pc1,pc2,label,origin");
  std::size_t rows = 0, synth = 0;
  while (std::getline(pca, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3) << line;
    synth += line.ends_with(",synth");
  }
  EXPECT_EQ(synth, 2u * 30u);
  EXPECT_EQ(rows, synth + 2u * 20u);
  EXPECT_TRUE(fs::exists(ev / "features_raw.csv"));
  EXPECT_TRUE(fs::exists(ev / "summary.txt"));

  const CliResult bad = rfs({"eval", "--checkpoint", (run / "checkpoint.rfsc").string(), "--data", data.string(),
                       "--mode", "all", "--out", ev.string()});
  EXPECT_EQ(bad.code, cli::kUsage);
  const CliResult missing = rfs({"eval", "--checkpoint", (run / "nope.rfsc").string(), "--data", data.string(),
                           "--out", ev.string()});
  EXPECT_EQ(missing.code, cli::kDataError);
  const CliResult no_data = rfs({"train", "--data", (dir.path() / "absent").string(), "--out", run.string()});
  EXPECT_EQ(no_data.code, cli::kDataError);
}

TEST(Cli, AblationFlagEmitsVariantTable) {
  testing::TempDir dir("cli");
  const CliResult r = rfs(with({"train", "--ablation", "--workers", "4", "--out", dir.path().string()}, kSmall));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string table = testing::read_file(dir.path() / "ablation.csv");
  EXPECT_EQ(table, r.out);
  for (const char* v : {"\nb,", "\nb+Sd,", "\nb+Sd+Sps,", "\nb+Sd+Sp,"}) EXPECT_NE(table.find(v), std::string::npos) << v;
}

TEST(Cli, NumericFailureExitCode) {
  testing::TempDir dir("cli");
  const CliResult r = rfs(with({"train", "--set", "train.lr=1e150", "--set", "train.epochs=20", "--out", dir.path().string()}, kSmall));
  EXPECT_EQ(r.code, cli::kNumericFailure) << r.err;
  EXPECT_NE(r.err.find("epoch"), std::string::npos) << r.err;
}

TEST(Cli, GradcheckPassesAndDetectsInjectedFault) {
  const CliResult ok = rfs({"gradcheck"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  for (const char* name : {"critic_wgan_gp", "gradient_penalty", "generator_adversarial", "classifier_consistency",
                           "intra_semantic_diverging", "inter_structure_preserving", "generator_composite"}) {
    EXPECT_NE(ok.out.find(name), std::string::npos) << name;
  }
  EXPECT_NE(ok.out.find("max_rel_error="), std::string::npos);
  const CliResult bad = rfs({"gradcheck", "--inject-fault", "--instances", "2"});
  EXPECT_EQ(bad.code, cli::kNumericFailure);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(rfs({}).code, cli::kUsage);
  EXPECT_EQ(rfs({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(rfs({"eval"}).code, cli::kUsage);
}

TEST(Cli, DefaultTrainWithinBudget) {
  testing::TempDir dir("cli");
  const auto t0 = std::chrono::steady_clock::now();
  const CliResult r = rfs({"train", "--out", dir.path().string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(secs, 120.0);
}

}  // namespace
}  // namespace rfs
