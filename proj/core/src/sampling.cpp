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

#include "rfs/sampling.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rfs/errors.hpp"

namespace rfs {

void NoisePairConfig::validate() const {
  if (!(radius > 0) || !std::isfinite(radius)) throw ConfigError("sample.radius must be > 0");
  if (negatives == 0) throw ConfigError("sample.negatives must be >= 1");
  if (noise_dim == 0) throw ConfigError("sample.noise_dim must be >= 1");
}

Tensor sample_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<Real> v(rows * cols);
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return Tensor(rows, cols, std::move(v));
}

Tensor sample_query(const NoisePairConfig& cfg, Rng& rng) {
  return sample_normal(1, cfg.noise_dim, rng);
}

Tensor sample_positive(const Tensor& z, const NoisePairConfig& cfg, Rng& rng) {
  if (cfg.radius < 0) throw ConfigError("negative radius");
  std::uniform_real_distribution<double> rho(-cfg.radius, cfg.radius);
  std::vector<Real> v(z.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double delta = cfg.radius > 0 ? rho(rng) : 0.0;
    v[k] = static_cast<Real>(z[k] + delta);
    // Rounding of z + rho can land a hair outside the box when |z| >> r.
    if (std::abs(static_cast<double>(v[k]) - static_cast<double>(z[k])) > cfg.radius) v[k] = z[k];
  }
  return Tensor(z.rows(), z.cols(), std::move(v));
}

bool satisfies_positive_bound(const Tensor& z, const Tensor& positive, double radius) {
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (std::abs(static_cast<double>(positive[k]) - static_cast<double>(z[k])) > radius) return false;
  }
  return true;
}

bool satisfies_negative_bound(const Tensor& z, const Tensor& negative, double radius) {
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (!(std::abs(static_cast<double>(negative[k]) - static_cast<double>(z[k])) > radius)) return false;
  }
  return true;
}

std::vector<Tensor> sample_negatives(const Tensor& z, const NoisePairConfig& cfg, Rng& rng) {
  cfg.validate();
  if (z.size() != cfg.noise_dim) {
    throw DimensionError("sample_negatives: query has " + std::to_string(z.size()) +
                         " coordinates, config says " + std::to_string(cfg.noise_dim));
  }
  const std::size_t cap = 1000 * cfg.negatives;
  std::vector<Tensor> out;
  out.reserve(cfg.negatives);
  std::size_t consecutive_rejections = 0;
  while (out.size() < cfg.negatives) {
    Tensor candidate = sample_normal(1, cfg.noise_dim, rng);
    if (satisfies_negative_bound(z, candidate, cfg.radius)) {
      out.push_back(std::move(candidate));
      consecutive_rejections = 0;
    } else if (++consecutive_rejections >= cap) {
      throw SamplingInfeasibleError("negative sampling failed: " + std::to_string(cap) +
                                    " consecutive rejections at radius " +
                                    std::to_string(cfg.radius) + " with noise dim " +
                                    std::to_string(cfg.noise_dim));
    }
  }
  return out;
}

NoiseTriplet sample_triplet(const NoisePairConfig& cfg, Rng& rng) {
  cfg.validate();
  NoiseTriplet t;
  t.query = sample_query(cfg, rng);
  t.positive = sample_positive(t.query, cfg, rng);
  t.negatives = sample_negatives(t.query, cfg, rng);
  return t;
}

NoiseTripletBatch sample_triplet_batch(const NoisePairConfig& cfg, std::size_t batch, Rng& rng) {
  cfg.validate();
  if (batch == 0) throw ContractError("sample_triplet_batch: empty batch");
  const std::size_t d = cfg.noise_dim;
  const std::size_t n = cfg.negatives;
  std::vector<Real> q(batch * d), p(batch * d), neg(n * batch * d);
  for (std::size_t i = 0; i < batch; ++i) {
    const NoiseTriplet t = sample_triplet(cfg, rng);
    std::copy(t.query.values().begin(), t.query.values().end(), q.begin() + i * d);
    std::copy(t.positive.values().begin(), t.positive.values().end(), p.begin() + i * d);
    for (std::size_t k = 0; k < n; ++k) {
      std::copy(t.negatives[k].values().begin(), t.negatives[k].values().end(),
                neg.begin() + (k * batch + i) * d);
    }
  }
  return {Tensor(batch, d, std::move(q)), Tensor(batch, d, std::move(p)),
          Tensor(n * batch, d, std::move(neg))};
}

}  // namespace rfs
