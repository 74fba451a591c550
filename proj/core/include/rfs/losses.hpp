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

// Training objectives for the feature synthesizer.
//
// Every loss returns a scalar Var on the caller's tape so the composite
// objective can be differentiated in one pass.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rfs/features.hpp"
#include "rfs/models.hpp"
#include "rfs/tape.hpp"
#include "rfs/types.hpp"

namespace rfs {

struct LossWeights {
  double gp_lambda = 10.0;    // gradient-penalty coefficient
  double lambda_cls = 0.01;   // classifier consistency
  double lambda_sd = 0.001;   // intra-class semantic diverging
  double lambda_sp = 0.001;   // inter-class structure preserving
  double temperature = 0.1;

  void validate() const;
};

// -- adversarial --------------------------------------------------------------

struct CriticLoss {
  Var total;        // wasserstein + gp_lambda * penalty; what the critic minimizes
  Var wasserstein;  // mean D(fake) - mean D(real)
  Var penalty;      // mean (||grad_fhat D||_2 - 1)^2, unweighted
};

/// WGAN-GP critic objective. Interpolates fhat = mu * real + (1 - mu) * fake
/// with one mu ~ U[0, 1] per row drawn from rng.
CriticLoss critic_loss(const DiscriminatorVars& d, Var real, Var fake, Var w, double gp_lambda,
                       Rng& rng);
/// Same with explicit interpolation weights (B x 1).
CriticLoss critic_loss(const DiscriminatorVars& d, Var real, Var fake, Var w, double gp_lambda,
                       const Tensor& mu);

/// L2 norm of d(d_out)/d(f_hat) as a differentiable scalar.
Var input_grad_norm(Var d_out, Var f_hat);
/// Per-row norms of d(sum d_out)/d(f_hat), B x 1. Rows are independent samples.
Var input_grad_norms(Var d_out, Var f_hat);

/// -mean D(fake, w).
Var generator_adv_loss(const DiscriminatorVars& d, Var fake, Var w);

// -- classification -----------------------------------------------------------

/// Mean softmax cross-entropy of logits against target columns. With a mask,
/// the softmax runs over the unmasked columns only.
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets, Var mask = {});

/// Cross-entropy of synthesized features under the frozen seen classifier,
/// over its foreground (non-background) columns.
Var cls_consistency_loss(const ClassifierVars& seen, Var fake, std::span<const ClassId> labels);

// -- contrastive --------------------------------------------------------------

/// Row-wise cosine-similarity InfoNCE: each query row against its positive row
/// and the same row of every negative block, averaged over rows.
Var intra_sd_loss(Var query, Var positive, std::span<const Var> negatives, double temperature);

enum class Origin : std::uint8_t { kSynth = 0, kRealProposal = 1, kBackground = 2 };

const char* origin_name(Origin o);

struct HybridPool {
  Var features;  // P x D_f
  std::vector<ClassId> labels;
  std::vector<Origin> origins;
  Var synth_source;  // rows [0, synth_count) of features are this Var
  std::size_t synth_count = 0;

  std::size_t size() const { return labels.size(); }
  /// Indices of entries whose label differs from the given class.
  std::vector<std::size_t> negatives_for(ClassId label) const;
  std::vector<std::size_t> positives_for(ClassId label) const;
};

/// Synthesized rows first, then real proposals, then background rows.
/// Either real collection may be empty.
HybridPool build_hybrid_pool(Var synth, std::span<const ClassId> synth_labels,
                             const LabeledFeatures& real_proposals, const Tensor& backgrounds);

enum class PositivePolicy {
  kPreferRealProposal,  // a random same-class real proposal, else a random same-class synth
  kUniformSameClass,    // any same-class entry
};

struct InterSpResult {
  Var loss;
  std::size_t used = 0;
  std::size_t skipped = 0;  // queries with no positive in the pool
};

/// Cosine-similarity InfoNCE of each query against one positive and every
/// different-label pool entry. When queries is the pool's synth source, a
/// query never serves as its own positive.
InterSpResult inter_sp_loss(Var queries, std::span<const ClassId> query_labels,
                            const HybridPool& pool, double temperature, PositivePolicy policy,
                            Rng& rng);
/// Same with caller-chosen positives (pool indices, one per query).
InterSpResult inter_sp_loss(Var queries, std::span<const ClassId> query_labels,
                            const HybridPool& pool, double temperature,
                            std::span<const std::ptrdiff_t> positive_index);

// -- composite ----------------------------------------------------------------

struct GeneratorLossParts {
  Var adv;    // required
  Var cls;    // required when lambda_cls > 0
  Var intra;  // required when lambda_sd > 0
  Var inter;  // required when lambda_sp > 0
};

/// adv + lambda_cls * cls + lambda_sd * intra + lambda_sp * inter.
Var total_generator_objective(const GeneratorLossParts& parts, const LossWeights& weights);

}  // namespace rfs
