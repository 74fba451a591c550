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

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>
#include <unistd.h>

#include "rfs/data.hpp"
#include "rfs/losses.hpp"
#include "rfs/models.hpp"
#include "rfs/sampling.hpp"
#include "rfs/tape.hpp"
#include "rfs/tensor.hpp"

namespace {

using namespace rfs;

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = sample_normal(n, n, rng);
  const Tensor b = sample_normal(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(32, 256);

ModelDims bench_dims(std::size_t hidden) {
  ModelDims d;
  d.noise_dim = 16;
  d.semantic_dim = 16;
  d.feature_dim = 32;
  d.hidden_dim = hidden;
  return d;
}

// One critic update worth of work: forward, gradient penalty, parameter gradients.
void BM_CriticGradient(benchmark::State& state) {
  const std::size_t batch = 64;
  const ModelParams p = init_params(bench_dims(static_cast<std::size_t>(state.range(0))), 3);
  Rng rng(2);
  const Tensor real = sample_normal(batch, 32, rng);
  const Tensor fake = sample_normal(batch, 32, rng);
  const Tensor w = sample_normal(batch, 16, rng);
  for (auto _ : state) {
    Tape tape;
    const DiscriminatorVars d = bind(tape, p.discriminator, Binding::kVariable);
    const CriticLoss loss = critic_loss(d, tape.constant(real), tape.constant(fake), tape.constant(w), 10.0, rng);
    benchmark::DoNotOptimize(tape.gradient_values(loss.total, d.list()));
  }
}
BENCHMARK(BM_CriticGradient)->Arg(128)->Arg(256);

void BM_Generate(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const ModelParams p = init_params(bench_dims(128), 4);
  Rng rng(3);
  const Tensor z = sample_normal(rows, 16, rng);
  const Tensor w = sample_normal(rows, 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(generate(p.generator, z, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(64)->Arg(1024);

void BM_TripletBatch(benchmark::State& state) {
  NoisePairConfig cfg;
  cfg.radius = 1e-4;
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_triplet_batch(cfg, 64, rng));
}
BENCHMARK(BM_TripletBatch);

void BM_FeatureRoundTrip(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  const LabeledFeatures f{sample_normal(rows, 1024, rng), std::vector<ClassId>(rows, 1)};
  const auto path = std::filesystem::temp_directory_path() /
                    ("rfs_bench_" + std::to_string(::getpid()) + ".bin");
  for (auto _ : state) {
    save_features(f, path);
    benchmark::DoNotOptimize(load_features(path));
  }
  std::filesystem::remove(path);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(rows * 1024 * sizeof(double)));
}
BENCHMARK(BM_FeatureRoundTrip)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
