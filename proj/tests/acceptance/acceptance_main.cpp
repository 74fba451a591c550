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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   rfs_acceptance --rfs <path to rfs binary> [--workdir dir] [--workers n] [--only 1,5,8]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "rfs/gradsuite.hpp"
#include "rfs/losses.hpp"
#include "rfs/pipeline.hpp"
#include "rfs/sampling.hpp"

namespace fs = std::filesystem;
using namespace rfs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double round1(double v) { return std::round(v * 10) / 10; }

Outcome harmonic_mean_rows() {
  const double a = harmonic_mean(47.1, 49.1), b = harmonic_mean(30.9, 3.4);
  const bool ok = round1(a) == 48.1 && round1(b) == 6.1 &&
                  std::abs(a - testing::kHm_47_1_49_1) < 1e-9 && std::abs(b - testing::kHm_30_9_3_4) < 1e-9;
  return {ok, fmt("HM(47.1,49.1)=%.4f -> %.1f, HM(30.9,3.4)=%.4f -> %.1f", a, round1(a), b, round1(b))};
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  GradSuiteOptions opt;
  opt.instances = 20;
  const auto entries = run_gradient_suite(opt);
  const double secs = seconds_since(t0);
  bool ok = secs < 60 && entries.size() == 7;
  double worst = 0;
  std::string failed;
  for (const auto& e : entries) {
    ok = ok && e.passed && e.instances >= 20 && e.max_rel_error < 1e-4;
    worst = std::max(worst, e.max_rel_error);
    if (!e.passed) failed += " " + e.name;
  }
  return {ok, fmt("%zu losses x 20 instances, worst rel error %.2e, %.2fs%s", entries.size(), worst, secs,
                  failed.empty() ? "" : (" failed:" + failed).c_str())};
}

Outcome closed_forms() {
  // Symmetric IntraSD with ten negatives.
  double intra;
  {
    Tape tape;
    const Tensor v = Tensor::from_rows({{0.4, 1.2, 0.7, 0.1}, {2.0, 0.3, 0.3, 1.1}});
    std::vector<Var> negs;
    for (int i = 0; i < 10; ++i) negs.push_back(tape.constant(kernels::scale(v, 0.5 + i)));
    intra = intra_sd_loss(tape.variable(v), tape.constant(kernels::scale(v, 3)), negs, 0.1).value().item();
  }
  // Constant critic: zero input gradient, so the penalty term is lambda * (0 - 1)^2.
  double gp;
  {
    Tape tape;
    DiscriminatorParams p;
    p.w1 = Tensor(32 + 16, 8, Real(0.1));
    p.b1 = Tensor(1, 8);
    p.w2 = Tensor(8, 1);
    p.b2 = Tensor::scalar(3.0);
    Rng rng(1);
    const Tensor real = sample_normal(16, 32, rng), fake = sample_normal(16, 32, rng);
    const CriticLoss cl = critic_loss(bind(tape, p, Binding::kVariable), tape.constant(real), tape.constant(fake),
                                      tape.constant(sample_normal(16, 16, rng)), 10.0, rng);
    gp = 10.0 * cl.penalty.value().item();
  }
  // Zero seen classifier over eight seen classes plus background.
  double lcs;
  {
    Tape tape;
    ClassifierParams c;
    c.weight = Tensor(32, 9);
    c.bias = Tensor(1, 9);
    for (ClassId i = 0; i < 8; ++i) c.classes.push_back(i);
    c.classes.push_back(kBackground);
    Rng rng(2);
    std::vector<ClassId> labels(16);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = ClassId(i % 8);
    lcs = cls_consistency_loss(bind(tape, c, Binding::kConstant), tape.variable(sample_normal(16, 32, rng)), labels)
              .value()
              .item();
  }
  const double e1 = std::abs(intra - testing::kLn11), e2 = std::abs(gp - 10.0), e3 = std::abs(lcs - testing::kLn8);
  return {e1 < 1e-9 && e2 < 1e-9 && e3 < 1e-9,
          fmt("|IntraSD - ln 11|=%.1e, |GP - 10|=%.1e, |L_Cs - ln 8|=%.1e", e1, e2, e3)};
}

Outcome sampling_invariants() {
  std::size_t violations = 0, checked = 0;
  for (double r : {1e-6, 1e-4}) {
    NoisePairConfig cfg;
    cfg.radius = r;
    Rng rng(derive_seed(2024, static_cast<std::uint64_t>(-std::log10(r))));
    for (int i = 0; i < 10000; ++i) {
      const NoiseTriplet t = sample_triplet(cfg, rng);
      ++checked;
      violations += !satisfies_positive_bound(t.query, t.positive, r);
      for (const auto& n : t.negatives) {
        ++checked;
        violations += !satisfies_negative_bound(t.query, n, r);
      }
    }
  }
  return {violations == 0, fmt("%zu vectors checked at r in {1e-6, 1e-4}, %zu violations", checked, violations)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome ablation_direction(std::size_t workers) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto variants = all_variants();
  std::map<Variant, std::vector<double>> unseen;
  std::size_t sp_wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    BenchmarkConfig bc;
    bc.seed = seed;
    TrainConfig tc = desk_scale_config();
    tc.seed = seed;
    const auto rows = run_ablation(generate_benchmark(bc), tc, variants, workers);
    std::map<Variant, double> u;
    for (const auto& r : rows) {
      u[r.variant] = r.gzsd.unseen_accuracy;
      unseen[r.variant].push_back(r.gzsd.unseen_accuracy);
    }
    sp_wins += u[Variant::kSdSp] >= u[Variant::kSdSps];
    per_seed += fmt(" s%llu[%.1f %.1f %.1f %.1f]", static_cast<unsigned long long>(seed), u[Variant::kBaseline],
                    u[Variant::kSd], u[Variant::kSdSps], u[Variant::kSdSp]);
  }
  const double secs = seconds_since(t0);
  const double mb = median(unseen[Variant::kBaseline]), msd = median(unseen[Variant::kSd]),
               msps = median(unseen[Variant::kSdSps]), msp = median(unseen[Variant::kSdSp]);
  const bool ok = mb <= msd && msd <= msp && sp_wins >= 3 && secs < 15 * 60;
  return {ok, fmt("median GZSD unseen b=%.2f b+Sd=%.2f b+Sd+Sps=%.2f b+Sd+Sp=%.2f; Sp>=Sps in %zu/5; %.0fs;", mb, msd,
                  msps, msp, sp_wins, secs) +
                  per_seed};
}

Outcome zero_shot_transfer() {
  const auto t0 = std::chrono::steady_clock::now();
  const Benchmark bench = generate_benchmark(BenchmarkConfig{});
  // Learnability precondition: ridge from semantic vectors to seen class means.
  testing::Matrix x, y, q;
  auto mean_of = [](const LabeledFeatures& f, ClassId id) {
    std::vector<double> m(f.dim(), 0.0);
    double n = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.labels[i] != id) continue;
      n += 1;
      for (std::size_t k = 0; k < f.dim(); ++k) m[k] += f.features(i, k);
    }
    for (auto& v : m) v /= n;
    return m;
  };
  for (const auto& c : bench.seen) {
    x.emplace_back(c.semantic.values().begin(), c.semantic.values().end());
    y.push_back(mean_of(bench.seen_train, c.id));
  }
  for (const auto& c : bench.unseen) q.emplace_back(c.semantic.values().begin(), c.semantic.values().end());
  const auto pred = testing::ridge_predict(x, y, q, 1e-2);
  double ridge_cos = 1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    ridge_cos = std::min(ridge_cos, testing::cosine(pred[i], mean_of(bench.unseen_test, bench.unseen[i].id)));
  }

  const TrainConfig cfg = desk_scale_config();
  const ClassifierParams seen = pretrain_seen_classifier(bench, cfg);
  const PipelineResult full = finish_pipeline(bench, cfg, seen, train_synthesizer(bench, seen, cfg));
  TrainConfig untrained = cfg;
  untrained.epochs = 0;
  const PipelineResult control = finish_pipeline(bench, cfg, seen, train_synthesizer(bench, seen, untrained));
  const double secs = seconds_since(t0);
  const bool ok = ridge_cos > 0.8 && full.zsd.zsd_accuracy >= 70 && full.gzsd.harmonic_mean >= 50 &&
                  control.zsd.zsd_accuracy <= 40 && secs < 300;
  return {ok, fmt("ridge oracle min cosine %.4f; full ZSD=%.2f GZSD S=%.2f U=%.2f HM=%.2f; random-generator "
                  "control ZSD=%.2f; %.0fs",
                  ridge_cos, full.zsd.zsd_accuracy, full.gzsd.seen_accuracy, full.gzsd.unseen_accuracy,
                  full.gzsd.harmonic_mean, control.zsd.zsd_accuracy, secs)};
}

Outcome merge_invariance() {
  const Benchmark bench = generate_benchmark(BenchmarkConfig{});
  const TrainConfig cfg = desk_scale_config();
  const ClassifierParams seen = pretrain_seen_classifier(bench, cfg);
  std::map<ClassId, Tensor> vectors;
  for (const auto& c : bench.unseen) vectors.emplace(c.id, c.semantic);
  const LabeledFeatures synth = synthesize_unseen(init_generator(model_dims(bench, cfg), 3), vectors, 50, 3);
  const LabeledFeatures negatives = concat(bench.seen_train, bench.background);
  const ClassifierParams unseen = train_unseen_classifier(synth, cfg, &seen, &negatives);
  const ClassifierParams merged = merge_classifiers(seen, unseen);
  Rng rng(77);
  const Tensor f = sample_normal(1000, bench.feature_dim(), rng);
  const Tensor before = classifier_logits(seen, f);
  const Tensor after = kernels::slice_cols(classifier_logits(merged, f), 0, seen.num_classes());
  std::size_t differing = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    differing += std::memcmp(&before.values()[i], &after.values()[i], sizeof(Real)) != 0;
  }
  return {differing == 0 && before.identical(after),
          fmt("1000 features x %zu seen columns, %zu differing logits", seen.num_classes(), differing)};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome cli_determinism(const std::string& rfs_bin, const fs::path& work) {
  if (rfs_bin.empty() || !fs::exists(rfs_bin)) return {false, "rfs binary not found: '" + rfs_bin + "'"};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<fs::path> dirs;
  for (const char* name : {"run_a", "run_b"}) {
    const fs::path d = work / name;
    fs::remove_all(d);
    fs::create_directories(d);
    const std::string log = quote(d / "stdout.txt");
    const std::string cmds[] = {
        rfs_bin + " gen-data --seed 7 --out " + quote(d / "data"),
        rfs_bin + " train --seed 7 --data " + quote(d / "data") + " --out " + quote(d / "train"),
        rfs_bin + " eval --seed 7 --checkpoint " + quote(d / "train" / "checkpoint.rfsc") + " --data " +
            quote(d / "data") + " --mode gzsd --out " + quote(d / "eval"),
        rfs_bin + " eval --seed 7 --checkpoint " + quote(d / "train" / "checkpoint.rfsc") + " --data " +
            quote(d / "data") + " --mode zsd --out " + quote(d / "eval_zsd"),
    };
    for (const auto& c : cmds) {
      if (std::system((c + " >>" + log + " 2>&1").c_str()) != 0) return {false, "command failed: " + c};
    }
    dirs.push_back(d);
  }
  std::size_t compared = 0;
  std::vector<std::string> mismatched;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (!e.is_regular_file() || e.path().filename() == "stdout.txt") continue;
    const fs::path rel = fs::relative(e.path(), dirs[0]);
    ++compared;
    if (testing::read_file(e.path()) != testing::read_file(dirs[1] / rel)) mismatched.push_back(rel.string());
  }
  const bool has_core = fs::exists(dirs[0] / "train" / "train_log.csv") && fs::exists(dirs[0] / "eval" / "report.csv");
  std::string detail = fmt("%zu files compared across two gen-data/train/eval runs, %zu differ, %.0fs", compared,
                           mismatched.size(), seconds_since(t0));
  for (const auto& m : mismatched) detail += " " + m;
  return {has_core && mismatched.empty() && compared > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks", "rfs_acceptance"};
  std::string rfs_bin;
  std::string workdir = (fs::temp_directory_path() / "rfs_acceptance").string();
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<int> only;
  app.add_option("--rfs", rfs_bin, "path to the rfs command-line binary");
  app.add_option("--workdir", workdir, "scratch directory for the CLI runs");
  app.add_option("--workers", workers, "threads for ablation variants");
  app.add_option("--only", only, "run a subset of criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"harmonic-mean arithmetic", harmonic_mean_rows},
      {"gradient suite", gradient_suite},
      {"closed-form loss values", closed_forms},
      {"sampling invariants", sampling_invariants},
      {"ablation directionality", [&] { return ablation_direction(workers); }},
      {"zero-shot transfer sanity", zero_shot_transfer},
      {"merge invariance", merge_invariance},
      {"CLI determinism", [&] { return cli_determinism(rfs_bin, workdir); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
