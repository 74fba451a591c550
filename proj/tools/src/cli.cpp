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

#include "rfs_cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rfs/checkpoint.hpp"
#include "rfs/config.hpp"
#include "rfs/data.hpp"
#include "rfs/errors.hpp"
#include "rfs/gradsuite.hpp"
#include "rfs/pipeline.hpp"
#include "rfs/projection.hpp"

namespace rfs::cli {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  std::string data;
  std::string checkpoint;
  std::string mode = "gzsd";
  bool ablation = false;
  std::vector<std::string> variants;
  std::size_t seeds = 1;
  std::size_t workers = 1;
  std::size_t instances = 20;
  bool inject_fault = false;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig base;
  base.train = desk_scale_config();
  ExperimentConfig cfg = load_experiment_config(base, o.config, o.overrides);
  if (o.seed) {
    cfg.data.seed = *o.seed;
    cfg.train.seed = *o.seed;
  }
  return cfg;
}

fs::path ensure_dir(const std::string& dir) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

void write_file(const fs::path& p, const std::string& text) {
  auto os = open_out(p);
  os << text;
  if (!os) throw DataError("failed writing " + p.string());
}

Benchmark benchmark_for(const Options& o, const ExperimentConfig& cfg) {
  if (o.data.empty()) return generate_benchmark(cfg.data);
  if (!fs::is_directory(o.data)) throw DataError("data directory not found: " + o.data);
  return load_benchmark(o.data);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = resolve(o);
  const fs::path dir = ensure_dir(o.out.empty() ? "rfs_data" : o.out);
  const Benchmark bench = generate_benchmark(cfg.data);
  for (const auto& name : save_benchmark(bench, dir)) out << (dir / name).string() << '\n';
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = resolve(o);
  const Benchmark bench = benchmark_for(o, cfg);
  const fs::path dir = ensure_dir(o.out.empty() ? "rfs_run" : o.out);
  write_file(dir / "config.cfg", format_experiment_config(cfg));

  if (o.ablation) {
    const auto rows = run_ablation(bench, cfg.train, all_variants(), o.workers);
    std::ostringstream table;
    write_ablation_table(rows, table);
    write_file(dir / "ablation.csv", table.str());
    out << table.str();
    return kOk;
  }

  const PipelineResult r = run_pipeline(bench, cfg.train);
  save_checkpoint(r.params, dir / "checkpoint.rfsc");
  {
    auto os = open_out(dir / "train_log.csv");
    write_training_log(r.log, os);
  }
  out << "checkpoint: " << (dir / "checkpoint.rfsc").string() << '\n';
  out << "training log: " << (dir / "train_log.csv").string() << '\n';
  write_summary(r.gzsd, out);
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = resolve(o);
  const EvalMode mode = parse_mode(o.mode);
  if (o.checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
  const ModelParams params = load_checkpoint(o.checkpoint);
  if (params.merged_classifier.num_classes() == 0) {
    throw DataError("checkpoint has no merged classifier: " + o.checkpoint);
  }
  const Benchmark bench = benchmark_for(o, cfg);
  const fs::path dir = ensure_dir(o.out.empty() ? "rfs_eval" : o.out);

  const EvalReport report = evaluate(params.merged_classifier, bench, mode);
  {
    auto os = open_out(dir / "report.csv");
    write_report_csv(report, os);
  }
  std::ostringstream summary;
  write_summary(report, summary);

  // Synthesized unseen features next to the real test features, raw and in 2-D.
  std::map<ClassId, Tensor> unseen;
  for (const auto& c : bench.unseen) unseen.emplace(c.id, c.semantic);
  const LabeledFeatures synth = synthesize_unseen(params.generator, unseen, cfg.train.synth_per_class, params.seed);
  const LabeledFeatures real = mode == EvalMode::kZsd ? bench.unseen_test : concat(bench.seen_test, bench.unseen_test);
  const LabeledFeatures all = concat(synth, real);
  const Pca pca = fit_pca(all.features, 2);
  const Tensor xy = project(pca, all.features);
  {
    auto raw = open_out(dir / "features_raw.csv");
    auto proj = open_out(dir / "features_pca.csv");
    raw << "label,origin";
    for (std::size_t j = 0; j < all.dim(); ++j) raw << ",f" << j;
    raw << '\n';
    proj << "pc1,pc2,label,origin\n";
    for (std::size_t i = 0; i < all.size(); ++i) {
      const char* origin = i < synth.size() ? "synth" : "real";
      raw << all.labels[i] << ',' << origin;
      for (std::size_t j = 0; j < all.dim(); ++j) raw << ',' << fmt(all.features(i, j));
      raw << '\n';
      proj << fmt(xy(i, 0)) << ',' << fmt(xy(i, 1)) << ',' << all.labels[i] << ',' << origin << '\n';
    }
  }
  char ratio[64];
  std::snprintf(ratio, sizeof ratio, "PCA variance kept by 2 components: %.2f%%\n", 100.0 * pca.explained_ratio());
  summary << ratio;
  write_file(dir / "summary.txt", summary.str());
  out << summary.str();
  return kOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  GradSuiteOptions opts;
  opts.instances = o.instances;
  if (o.inject_fault) opts.corrupt_analytic = 1e-2;
  bool ok = true;
  for (const auto& e : run_gradient_suite(opts)) {
    char line[160];
    std::snprintf(line, sizeof line, "%-28s instances=%zu entries=%zu max_rel_error=%.3e %s\n", e.name.c_str(),
                  e.instances, e.entries, e.max_rel_error, e.passed ? "PASS" : "FAIL");
    out << line;
    ok = ok && e.passed;
  }
  return ok ? kOk : kNumericFailure;
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = resolve(o);
  std::vector<Variant> variants;
  for (const auto& v : o.variants) variants.push_back(parse_variant(v));
  if (variants.empty()) variants = all_variants();
  if (o.seeds < 1) throw ConfigError("--seeds must be >= 1");
  const fs::path dir = ensure_dir(o.out.empty() ? "rfs_ablation" : o.out);

  std::ostringstream table;
  table << "seed,variant,zsd_unseen,gzsd_seen,gzsd_unseen,gzsd_hm\n";
  for (std::size_t s = 0; s < o.seeds; ++s) {
    ExperimentConfig run = cfg;
    run.data.seed = cfg.data.seed + s;
    run.train.seed = cfg.train.seed + s;
    const Benchmark bench = o.data.empty() ? generate_benchmark(run.data) : benchmark_for(o, run);
    std::ostringstream rows;
    write_ablation_table(run_ablation(bench, run.train, variants, o.workers), rows);
    std::string line;
    std::istringstream in(rows.str());
    std::getline(in, line);  // header
    while (std::getline(in, line)) table << run.train.seed << ',' << line << '\n';
  }
  write_file(dir / "ablation.csv", table.str());
  out << table.str();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region-feature synthesizer for zero-shot detection experiments", "rfs"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "seed for data generation and training");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--set", o.overrides, "override one config key (key=value), repeatable");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic benchmark");
  common(gen);

  CLI::App* train = app.add_subcommand("train", "train the synthesizer and classifiers");
  common(train);
  train->add_option("--data", o.data, "benchmark directory (default: generate from config)");
  train->add_flag("--ablation", o.ablation, "train every ablation variant and print the table");
  train->add_option("--workers", o.workers, "threads for ablation variants");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  common(eval);
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint written by train")->required();
  eval->add_option("--data", o.data, "benchmark directory (default: generate from config)");
  eval->add_option("--mode", o.mode, "zsd or gzsd");

  CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  grad->add_option("--instances", o.instances, "random instances per loss");
  grad->add_flag("--inject-fault", o.inject_fault)->group("");

  CLI::App* ablate = app.add_subcommand("ablate", "ablation table over one or more seeds");
  common(ablate);
  ablate->add_option("--data", o.data, "benchmark directory (default: generate per seed)");
  ablate->add_option("--variants", o.variants, "subset of: b b+Sd b+Sd+Sps b+Sd+Sp");
  ablate->add_option("--seeds", o.seeds, "number of consecutive seeds");
  ablate->add_option("--workers", o.workers, "threads for ablation variants");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (grad->parsed()) return cmd_gradcheck(o, out);
    if (ablate->parsed()) return cmd_ablate(o, out);
  } catch (const ConfigError& e) {
    err << "rfs: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "rfs: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const SamplingInfeasibleError& e) {
    err << "rfs: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    err << "rfs: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "rfs: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace rfs::cli
