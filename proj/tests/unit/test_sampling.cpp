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

#include "rfs/errors.hpp"
#include "rfs/sampling.hpp"

namespace rfs {
namespace {

NoisePairConfig make_cfg(double r, std::size_t d, std::size_t n = 10) {
  NoisePairConfig c;
  c.radius = r;
  c.noise_dim = d;
  c.negatives = n;
  return c;
}

TEST(SampleQuery, Reproducible) {
  const NoisePairConfig cfg = make_cfg(1e-6, 16);
  Rng a(5), b(5);
  EXPECT_TRUE(sample_query(cfg, a).identical(sample_query(cfg, b)));
}

TEST(SampleQuery, StandardNormalMoments) {
  const NoisePairConfig cfg = make_cfg(1e-6, 1);
  Rng rng(77);
  const std::size_t n = 100000;
  double mean = 0, m2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sample_query(cfg, rng).item();
    mean += x / n;
    m2 += x * x / n;
  }
  const double var = (m2 - mean * mean) * n / (n - 1);
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(double(n)));
  // Var of the sample variance of a standard normal is 2 / (n - 1).
  EXPECT_LT(std::abs(var - 1), 3.0 * std::sqrt(2.0 / (n - 1)));
}

TEST(SamplePositive, ZeroRadiusReturnsQuery) {
  Rng rng(1);
  const NoisePairConfig cfg = make_cfg(1e-6, 8);
  const Tensor z = sample_query(cfg, rng);
  NoisePairConfig zero = cfg;
  zero.radius = 0;
  EXPECT_TRUE(sample_positive(z, zero, rng).identical(z));
}

TEST(SamplePositive, BoxBoundAndZeroMeanOffset) {
  const double r = 1e-2;
  const NoisePairConfig cfg = make_cfg(r, 1);
  Rng rng(3);
  const Tensor z = Tensor::scalar(0.25);
  const std::size_t n = 100000;
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor p = sample_positive(z, cfg, rng);
    ASSERT_TRUE(satisfies_positive_bound(z, p, r));
    mean += (p.item() - z.item()) / n;
  }
  // U[-r, r] has standard deviation r / sqrt(3).
  EXPECT_LT(std::abs(mean), 3 * r / std::sqrt(3.0) / std::sqrt(double(n)));
}

TEST(SampleNegatives, CountAndElementwiseBound) {
  const NoisePairConfig cfg = make_cfg(1e-2, 32, 10);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Tensor z = sample_query(cfg, rng);
    const auto negs = sample_negatives(z, cfg, rng);
    ASSERT_EQ(negs.size(), 10u);
    for (const auto& n : negs) ASSERT_TRUE(satisfies_negative_bound(z, n, cfg.radius));
  }
}

TEST(SampleNegatives, AcceptanceRateAtDefaultScale) {
  // Per-coordinate rejection probability <= 2 r phi(0); union bound over 32 coordinates is 2.55e-3.
  const NoisePairConfig cfg = make_cfg(1e-4, 32);
  Rng rng(8);
  std::size_t accepted = 0, total = 0;
  for (int i = 0; i < 2000; ++i) {
    const Tensor z = sample_query(cfg, rng);
    for (int k = 0; k < 20; ++k, ++total) {
      if (satisfies_negative_bound(z, sample_normal(1, 32, rng), cfg.radius)) ++accepted;
    }
  }
  EXPECT_GT(double(accepted) / double(total), 0.99);
}

TEST(SampleNegatives, InfeasibleRadiusThrows) {
  const NoisePairConfig cfg = make_cfg(10.0, 32, 2);
  Rng rng(1);
  const Tensor z = sample_query(cfg, rng);
  EXPECT_THROW(sample_negatives(z, cfg, rng), SamplingInfeasibleError);
}

TEST(SampleNegatives, ConfigValidation) {
  EXPECT_THROW(make_cfg(0, 8).validate(), ConfigError);
  EXPECT_THROW(make_cfg(1e-3, 8, 0).validate(), ConfigError);
}

TEST(Triplets, InvariantsAcrossRadiiAndDims) {
  for (double r : {1e-6, 1e-4, 1e-2}) {
    for (std::size_t d : {8u, 32u, 128u}) {
      const NoisePairConfig cfg = make_cfg(r, d, 1);
      Rng rng(derive_seed(42, d));
      std::size_t violations = 0;
      for (int i = 0; i < 10000; ++i) {
        const NoiseTriplet t = sample_triplet(cfg, rng);
        if (!satisfies_positive_bound(t.query, t.positive, r)) ++violations;
        for (const auto& n : t.negatives) {
          if (!satisfies_negative_bound(t.query, n, r)) ++violations;
        }
      }
      EXPECT_EQ(violations, 0u) << "r=" << r << " d=" << d;
    }
  }
}

TEST(Triplets, BatchLayoutAndDeterminism) {
  const NoisePairConfig cfg = make_cfg(1e-4, 6, 3);
  Rng a(12), b(12);
  const NoiseTripletBatch x = sample_triplet_batch(cfg, 5, a);
  const NoiseTripletBatch y = sample_triplet_batch(cfg, 5, b);
  EXPECT_TRUE(x.query.identical(y.query));
  EXPECT_TRUE(x.negatives.identical(y.negatives));
  ASSERT_EQ(x.negatives.rows(), 15u);
  for (std::size_t i = 0; i < 5; ++i) {
    const Tensor q = kernels::slice_rows(x.query, i, 1);
    EXPECT_TRUE(satisfies_positive_bound(q, kernels::slice_rows(x.positive, i, 1), cfg.radius));
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_TRUE(satisfies_negative_bound(q, kernels::slice_rows(x.negatives, k * 5 + i, 1), cfg.radius));
    }
  }
}

}  // namespace
}  // namespace rfs
