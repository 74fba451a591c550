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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "rfs/checkpoint.hpp"
#include "rfs/errors.hpp"
#include "rfs/losses.hpp"
#include "rfs/models.hpp"
#include "rfs/sampling.hpp"

namespace rfs {
namespace {

ModelDims tiny_dims() {
  ModelDims d;
  d.noise_dim = 1;
  d.semantic_dim = 1;
  d.feature_dim = 1;
  d.hidden_dim = 1;
  return d;
}

GeneratorParams filled_generator(const ModelDims& d, Real w, Real b) {
  GeneratorParams g;
  g.w1 = Tensor(d.noise_dim + d.semantic_dim, d.hidden_dim, w);
  g.b1 = Tensor(1, d.hidden_dim, b);
  g.w2 = Tensor(d.hidden_dim, d.feature_dim, w);
  g.b2 = Tensor(1, d.feature_dim, b);
  return g;
}

TEST(Generator, ZeroParametersGiveZeroOutput) {
  ModelDims d;
  const GeneratorParams g = filled_generator(d, 0, 0);
  Rng rng(1);
  const Tensor f = generate(g, sample_normal(4, d.noise_dim, rng), sample_normal(4, d.semantic_dim, rng));
  EXPECT_EQ(f.rows(), 4u);
  EXPECT_EQ(f.cols(), d.feature_dim);
  EXPECT_EQ(kernels::max_abs(f), 0);
}

TEST(Generator, HandSetOneHiddenUnit) {
  const GeneratorParams g = filled_generator(tiny_dims(), 1, 0);
  EXPECT_EQ(generate(g, Tensor::scalar(1), Tensor::scalar(1)).item(), 2);
}

TEST(Generator, RandomInitGivesDistinctNonNegativeFeatures) {
  ModelDims d;
  const GeneratorParams g = init_generator(d, 3);
  Rng rng(4);
  const Tensor w = repeat_rows(sample_normal(1, d.semantic_dim, rng), 300);
  const Tensor f = generate(g, sample_normal(300, d.noise_dim, rng), w);
  for (Real v : f.values()) EXPECT_GE(v, 0);
  std::set<std::vector<Real>> rows;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    const auto r = f.row_span(i);
    rows.emplace(r.begin(), r.end());
  }
  EXPECT_EQ(rows.size(), 300u);
}

TEST(Generator, DimensionMismatchThrows) {
  ModelDims d;
  const GeneratorParams g = init_generator(d, 1);
  EXPECT_THROW(generate(g, Tensor(2, d.noise_dim + 1), Tensor(2, d.semantic_dim)), DimensionError);
}

TEST(Discriminator, ZeroParametersScoreZero) {
  ModelDims d;
  DiscriminatorParams p;
  p.w1 = Tensor(d.feature_dim + d.semantic_dim, d.hidden_dim);
  p.b1 = Tensor(1, d.hidden_dim);
  p.w2 = Tensor(d.hidden_dim, 1);
  p.b2 = Tensor(1, 1);
  Rng rng(2);
  const Tensor s = critic_scores(p, sample_normal(5, d.feature_dim, rng), sample_normal(5, d.semantic_dim, rng));
  EXPECT_EQ(s.cols(), 1u);
  EXPECT_EQ(kernels::max_abs(s), 0);
}

TEST(Discriminator, LinearInFinalLayerWeights) {
  ModelDims d;
  DiscriminatorParams p = init_discriminator(d, 5);
  Rng rng(6);
  const Tensor f = sample_normal(6, d.feature_dim, rng), w = sample_normal(6, d.semantic_dim, rng);
  const Tensor base = critic_scores(p, f, w);
  p.w2 = kernels::scale(p.w2, 3.5);
  const Tensor scaled = critic_scores(p, f, w);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(scaled[i], 3.5 * base[i], 1e-12 * (1 + std::abs(base[i])));
}

TEST(Discriminator, HandSetTwoUnitCritic) {
  // f = [1], w = [2]; hidden pre-activations [1 + 2, -1 - 2] + [0, 0.5].
  DiscriminatorParams p;
  p.w1 = Tensor::from_rows({{1, -1}, {1, -1}});
  p.b1 = Tensor::row({0, 0.5});
  p.w2 = Tensor::from_rows({{2}, {3}});
  p.b2 = Tensor::scalar(0.25);
  // hidden = [3, lrelu(-2.5) = -0.5]; score = 2*3 + 3*(-0.5) + 0.25 = 4.75
  EXPECT_NEAR(critic_scores(p, Tensor::scalar(1), Tensor::scalar(2)).item(), 4.75, 1e-15);
}

TEST(Discriminator, ScoreIsUnbounded) {
  ModelDims d;
  DiscriminatorParams p = init_discriminator(d, 8);
  p.w2 = kernels::scale(p.w2, 1e6);
  Rng rng(9);
  const Tensor s = critic_scores(p, sample_normal(4, d.feature_dim, rng), sample_normal(4, d.semantic_dim, rng));
  EXPECT_GT(kernels::max_abs(s), 1.0);
}

TEST(Classifier, ZeroParametersGiveUniformSoftmax) {
  ClassifierParams c;
  c.weight = Tensor(4, 3);
  c.bias = Tensor(1, 3);
  c.classes = {0, 1, 2};
  Tape tape;
  const Var p = softmax_rows(classifier_forward(bind(tape, c, Binding::kConstant),
                                                tape.constant(Tensor::row({1, 2, 3, 4}))));
  for (Real v : p.value().values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Classifier, FavorableWeightColumnWins) {
  ClassifierParams c;
  c.weight = Tensor::from_rows({{0, 0, 0}, {0, 5, 0}});
  c.bias = Tensor(1, 3);
  c.classes = {7, 8, 9};
  const Tensor logits = classifier_logits(c, Tensor::row({0.1, 1.0}));
  EXPECT_GT(logits[1], logits[0]);
  EXPECT_GT(logits[1], logits[2]);
  EXPECT_EQ(c.column_of(8), 1);
  EXPECT_EQ(c.column_of(42), -1);
}

TEST(Classifier, LogitsMatchMatmulOracle) {
  const ClassifierParams c = init_classifier(6, {0, 1, 2, kBackground}, 4);
  Rng rng(10);
  const Tensor f = sample_normal(5, 6, rng);
  const Tensor logits = classifier_logits(c, f);
  testing::Matrix fm(5, std::vector<double>(6)), wm(6, std::vector<double>(4));
  for (std::size_t i = 0; i < 5; ++i) for (std::size_t j = 0; j < 6; ++j) fm[i][j] = f(i, j);
  for (std::size_t i = 0; i < 6; ++i) for (std::size_t j = 0; j < 4; ++j) wm[i][j] = c.weight(i, j);
  const auto ref = testing::naive_matmul(fm, wm);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(logits(i, j), ref[i][j] + c.bias[j], 1e-12);
  }
}

TEST(InitParams, DeterministicPerSeed) {
  ModelDims d;
  const ModelParams a = init_params(d, 17), b = init_params(d, 17), c = init_params(d, 18);
  EXPECT_TRUE(a.generator.w1.identical(b.generator.w1));
  EXPECT_TRUE(a.discriminator.w2.identical(b.discriminator.w2));
  EXPECT_FALSE(a.generator.w1.identical(c.generator.w1));
  EXPECT_EQ(kernels::max_abs(a.generator.b1), 0);
}

TEST(InitParams, WeightStatistics) {
  ModelDims d;
  d.noise_dim = 50;
  d.semantic_dim = 50;
  d.hidden_dim = 100;  // 10^4 first-layer generator weights
  const GeneratorParams g = init_generator(d, 99);
  ASSERT_EQ(g.w1.size(), 10000u);
  double mean = 0, var = 0;
  for (Real v : g.w1.values()) mean += v / 1e4;
  for (Real v : g.w1.values()) var += (v - mean) * (v - mean) / (1e4 - 1);
  EXPECT_LT(std::abs(mean), 3 * 0.02 / 100.0);
  EXPECT_NEAR(std::sqrt(var), 0.02, 0.02 * 0.05);
}

TEST(Checkpoint, RoundTripIsLossless) {
  testing::TempDir dir("ckpt");
  ModelDims d;
  d.hidden_dim = 8;
  ModelParams p = init_params(d, 21);
  p.seen_classifier = init_classifier(d.feature_dim, {0, 1, kBackground}, 1);
  p.unseen_classifier = init_classifier(d.feature_dim, {2}, 2);
  p.merged_classifier = init_classifier(d.feature_dim, {0, 1, kBackground, 2}, 3);
  const auto path = dir.path() / "m.rfsc";
  save_checkpoint(p, path);
  const ModelParams q = load_checkpoint(path);
  EXPECT_EQ(q.seed, 21u);
  EXPECT_EQ(q.dims.hidden_dim, 8u);
  EXPECT_TRUE(q.generator.w1.identical(p.generator.w1));
  EXPECT_TRUE(q.discriminator.b2.identical(p.discriminator.b2));
  EXPECT_TRUE(q.merged_classifier.weight.identical(p.merged_classifier.weight));
  EXPECT_EQ(q.merged_classifier.classes, p.merged_classifier.classes);
}

TEST(Checkpoint, TruncatedFileIsDataError) {
  testing::TempDir dir("ckpt");
  ModelDims d;
  d.hidden_dim = 4;
  ModelParams p = init_params(d, 1);
  p.seen_classifier = init_classifier(d.feature_dim, {0, 1}, 1);
  p.unseen_classifier = init_classifier(d.feature_dim, {2}, 1);
  p.merged_classifier = init_classifier(d.feature_dim, {0, 1, 2}, 1);
  const auto path = dir.path() / "m.rfsc";
  save_checkpoint(p, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
  EXPECT_THROW(load_checkpoint(path), DataError);
  std::ofstream(path, std::ios::binary) << "junk";
  EXPECT_THROW(load_checkpoint(path), DataError);
}

}  // namespace
}  // namespace rfs
