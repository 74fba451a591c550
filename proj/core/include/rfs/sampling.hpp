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

// Query / positive / negative noise construction for the intra-class
// diverging loss. Positives lie in the box |z+ - z| <= r (per coordinate);
// negatives are standard normal draws with |z- - z| > r in every coordinate.

#pragma once

#include <cstddef>
#include <vector>

#include "rfs/tensor.hpp"
#include "rfs/types.hpp"

namespace rfs {

struct NoisePairConfig {
  double radius = 1e-6;
  std::size_t negatives = 10;
  std::size_t noise_dim = 16;

  void validate() const;
};

struct NoiseTriplet {
  Tensor query;                   // 1 x D_z
  Tensor positive;                // 1 x D_z
  std::vector<Tensor> negatives;  // N of 1 x D_z
};

/// Row-stacked triplets for a batch of B queries.
struct NoiseTripletBatch {
  Tensor query;     // B x D_z
  Tensor positive;  // B x D_z
  Tensor negatives; // (N * B) x D_z; negative k of query i is row k * B + i
};

Tensor sample_query(const NoisePairConfig& cfg, Rng& rng);
Tensor sample_positive(const Tensor& z, const NoisePairConfig& cfg, Rng& rng);
/// Rejection sampling. Throws SamplingInfeasibleError after 1000 * N
/// consecutive rejections.
std::vector<Tensor> sample_negatives(const Tensor& z, const NoisePairConfig& cfg, Rng& rng);
NoiseTriplet sample_triplet(const NoisePairConfig& cfg, Rng& rng);
NoiseTripletBatch sample_triplet_batch(const NoisePairConfig& cfg, std::size_t batch, Rng& rng);

/// B x D i.i.d. standard normal.
Tensor sample_normal(std::size_t rows, std::size_t cols, Rng& rng);

bool satisfies_positive_bound(const Tensor& z, const Tensor& positive, double radius);
bool satisfies_negative_bound(const Tensor& z, const Tensor& negative, double radius);

}  // namespace rfs
