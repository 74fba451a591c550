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

#include "rfs/losses.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rfs/errors.hpp"

namespace rfs {

void LossWeights::validate() const {
  if (gp_lambda < 0 || lambda_cls < 0 || lambda_sd < 0 || lambda_sp < 0) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (!(temperature > 0)) throw ConfigError("loss.temperature must be > 0");
}

namespace {

void require_batch(Var v, const char* what) {
  if (!v.valid()) throw ContractError(std::string(what) + ": unbound input");
}

void require_same_rows(Var a, Var b, const char* what) {
  if (a.rows() != b.rows()) {
    throw DimensionError(std::string(what) + ": batch sizes differ (" + std::to_string(a.rows()) +
                         " vs " + std::to_string(b.rows()) + ")");
  }
}

}  // namespace

CriticLoss critic_loss(const DiscriminatorVars& d, Var real, Var fake, Var w, double gp_lambda,
                       Rng& rng) {
  require_batch(real, "critic_loss");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Real> mu(real.rows());
  for (Real& m : mu) m = static_cast<Real>(u(rng));
  return critic_loss(d, real, fake, w, gp_lambda, Tensor(real.rows(), 1, std::move(mu)));
}

CriticLoss critic_loss(const DiscriminatorVars& d, Var real, Var fake, Var w, double gp_lambda,
                       const Tensor& mu) {
  require_batch(real, "critic_loss");
  require_batch(fake, "critic_loss");
  require_same_rows(real, fake, "critic_loss");
  require_same_rows(real, w, "critic_loss");
  if (mu.rows() != real.rows() || mu.cols() != 1) {
    throw DimensionError("critic_loss: interpolation weights must be " +
                         shape_string(real.rows(), 1));
  }
  Tape& tape = real.tape();
  const std::size_t dim = real.cols();

  std::vector<Real> one_minus(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) one_minus[i] = Real(1) - mu[i];
  const Var mu_v = broadcast_cols(tape.constant(mu), dim);
  const Var rest_v = broadcast_cols(tape.constant(Tensor(mu.rows(), 1, std::move(one_minus))), dim);
  const Var f_hat = mu_v * real + rest_v * fake;

  const Var d_real = discriminator_forward(d, real, w);
  const Var d_fake = discriminator_forward(d, fake, w);
  const Var d_hat = discriminator_forward(d, f_hat, w);

  CriticLoss out;
  out.wasserstein = mean(d_fake) - mean(d_real);
  const Var norms = input_grad_norms(d_hat, f_hat);
  const Var dev = add_scalar(norms, Real(-1));
  out.penalty = mean(dev * dev);
  out.total = out.wasserstein + scale(out.penalty, static_cast<Real>(gp_lambda));
  return out;
}

Var input_grad_norm(Var d_out, Var f_hat) {
  Tape& tape = d_out.tape();
  if (!f_hat.valid() || &f_hat.tape() != &tape) {
    throw ContractError("input_grad_norm: f_hat is not on the critic's tape");
  }
  const Var s = d_out.value().is_scalar() ? d_out : sum(d_out);
  const Var wrt[] = {f_hat};
  const Var g = tape.gradient(s, wrt)[0];
  return sqrt(sum(g * g));
}

Var input_grad_norms(Var d_out, Var f_hat) {
  Tape& tape = d_out.tape();
  if (!f_hat.valid() || &f_hat.tape() != &tape) {
    throw ContractError("input_grad_norms: f_hat is not on the critic's tape");
  }
  const Var s = d_out.value().is_scalar() ? d_out : sum(d_out);
  const Var wrt[] = {f_hat};
  return row_norms(tape.gradient(s, wrt)[0]);
}

Var generator_adv_loss(const DiscriminatorVars& d, Var fake, Var w) {
  require_batch(fake, "generator_adv_loss");
  return -mean(discriminator_forward(d, fake, w));
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets, Var mask) {
  if (targets.size() != logits.rows()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(logits.rows()) + " rows");
  }
  const std::size_t k = logits.cols();
  std::vector<Real> onehot(logits.rows() * k, Real(0));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= k) throw ContractError("softmax_cross_entropy: target column out of range");
    if (mask.valid() && mask.value()(i, targets[i]) == Real(0)) {
      throw ContractError("softmax_cross_entropy: target column is masked out");
    }
    onehot[i * k + targets[i]] = Real(1);
  }
  Tape& tape = logits.tape();
  const Var picked = sum_cols(logits * tape.constant(Tensor(logits.rows(), k, std::move(onehot))));
  return mean(logsumexp_rows(logits, mask) - picked);
}

Var cls_consistency_loss(const ClassifierVars& seen, Var fake, std::span<const ClassId> labels) {
  require_batch(fake, "cls_consistency_loss");
  const std::size_t k = seen.classes.size();
  std::vector<Real> fg(k);
  for (std::size_t j = 0; j < k; ++j) fg[j] = seen.classes[j] == kBackground ? Real(0) : Real(1);

  std::vector<std::size_t> targets;
  targets.reserve(labels.size());
  for (ClassId c : labels) {
    auto it = std::find(seen.classes.begin(), seen.classes.end(), c);
    if (c == kBackground || it == seen.classes.end()) {
      throw ContractError("cls_consistency_loss: label " + std::to_string(c) +
                          " is not a seen class");
    }
    targets.push_back(static_cast<std::size_t>(std::distance(seen.classes.begin(), it)));
  }
  Tape& tape = fake.tape();
  const Var logits = classifier_forward(seen, fake);
  const Var mask = tape.constant(repeat_rows(Tensor::row(std::move(fg)), logits.rows()));
  return softmax_cross_entropy(logits, targets, mask);
}

Var intra_sd_loss(Var query, Var positive, std::span<const Var> negatives, double temperature) {
  if (!(temperature > 0)) throw ContractError("intra_sd_loss: temperature must be > 0");
  if (negatives.empty()) throw ContractError("intra_sd_loss: at least one negative required");
  require_same_rows(query, positive, "intra_sd_loss");
  const Real inv_t = static_cast<Real>(1.0 / temperature);
  const Var q = normalize_rows(query);
  Var logits = sum_cols(q * normalize_rows(positive));
  for (Var neg : negatives) {
    require_same_rows(query, neg, "intra_sd_loss");
    logits = concat_cols(logits, sum_cols(q * normalize_rows(neg)));
  }
  logits = scale(logits, inv_t);
  return mean(logsumexp_rows(logits) - slice_cols(logits, 0, 1));
}

const char* origin_name(Origin o) {
  switch (o) {
    case Origin::kSynth: return "synth";
    case Origin::kRealProposal: return "real";
    case Origin::kBackground: return "background";
  }
  return "unknown";
}

std::vector<std::size_t> HybridPool::negatives_for(ClassId label) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] != label) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> HybridPool::positives_for(ClassId label) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] == label) out.push_back(j);
  }
  return out;
}

HybridPool build_hybrid_pool(Var synth, std::span<const ClassId> synth_labels,
                             const LabeledFeatures& real_proposals, const Tensor& backgrounds) {
  if (!synth.valid()) throw ContractError("build_hybrid_pool: empty pool (no synthesized rows)");
  if (synth_labels.size() != synth.rows()) {
    throw DimensionError("build_hybrid_pool: label count does not match synthesized rows");
  }
  Tape& tape = synth.tape();
  HybridPool pool;
  pool.synth_source = synth;
  pool.synth_count = synth.rows();
  pool.features = synth;
  pool.labels.assign(synth_labels.begin(), synth_labels.end());
  pool.origins.assign(synth.rows(), Origin::kSynth);

  if (real_proposals.size() > 0) {
    if (real_proposals.labels.size() != real_proposals.size()) {
      throw ContractError("build_hybrid_pool: real proposals must be labeled");
    }
    pool.features = concat_rows(pool.features, tape.constant(real_proposals.features));
    pool.labels.insert(pool.labels.end(), real_proposals.labels.begin(), real_proposals.labels.end());
    pool.origins.insert(pool.origins.end(), real_proposals.size(), Origin::kRealProposal);
  }
  if (!backgrounds.empty()) {
    pool.features = concat_rows(pool.features, tape.constant(backgrounds));
    pool.labels.insert(pool.labels.end(), backgrounds.rows(), kBackground);
    pool.origins.insert(pool.origins.end(), backgrounds.rows(), Origin::kBackground);
  }
  return pool;
}

InterSpResult inter_sp_loss(Var queries, std::span<const ClassId> query_labels,
                            const HybridPool& pool, double temperature, PositivePolicy policy,
                            Rng& rng) {
  if (query_labels.size() != queries.rows()) {
    throw DimensionError("inter_sp_loss: label count does not match query rows");
  }
  const bool self_in_pool = pool.synth_source.valid() && queries.valid() &&
                            &pool.synth_source.tape() == &queries.tape() &&
                            pool.synth_source.id() == queries.id();
  std::vector<std::ptrdiff_t> chosen(queries.rows(), -1);
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    std::vector<std::size_t> real, synth;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (pool.labels[j] != query_labels[i]) continue;
      if (self_in_pool && j == i) continue;
      (pool.origins[j] == Origin::kRealProposal ? real : synth).push_back(j);
    }
    const std::vector<std::size_t>* from = nullptr;
    std::vector<std::size_t> any;
    if (policy == PositivePolicy::kPreferRealProposal) {
      from = !real.empty() ? &real : &synth;
    } else {
      any = real;
      any.insert(any.end(), synth.begin(), synth.end());
      std::sort(any.begin(), any.end());
      from = &any;
    }
    if (from->empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, from->size() - 1);
    chosen[i] = static_cast<std::ptrdiff_t>((*from)[pick(rng)]);
  }
  return inter_sp_loss(queries, query_labels, pool, temperature, chosen);
}

InterSpResult inter_sp_loss(Var queries, std::span<const ClassId> query_labels,
                            const HybridPool& pool, double temperature,
                            std::span<const std::ptrdiff_t> positive_index) {
  if (!(temperature > 0)) throw ContractError("inter_sp_loss: temperature must be > 0");
  if (pool.size() == 0) throw ContractError("inter_sp_loss: empty pool");
  const std::size_t b = queries.rows();
  const std::size_t p = pool.size();
  if (query_labels.size() != b || positive_index.size() != b) {
    throw DimensionError("inter_sp_loss: per-query inputs do not match query rows");
  }
  Tape& tape = queries.tape();

  std::vector<Real> mask(b * p, Real(0)), onehot(b * p, Real(0)), weight(b, Real(0));
  InterSpResult result;
  for (std::size_t i = 0; i < b; ++i) {
    const std::ptrdiff_t pos = positive_index[i];
    if (pos < 0) {
      // Degenerate single-entry row: contributes exactly zero loss and gradient.
      mask[i * p] = onehot[i * p] = Real(1);
      ++result.skipped;
      continue;
    }
    if (static_cast<std::size_t>(pos) >= p || pool.labels[pos] != query_labels[i]) {
      throw ContractError("inter_sp_loss: positive index does not name a same-class pool entry");
    }
    bool any_negative = false;
    for (std::size_t j = 0; j < p; ++j) {
      if (pool.labels[j] != query_labels[i]) {
        mask[i * p + j] = Real(1);
        any_negative = true;
      }
    }
    if (!any_negative) {
      throw ContractError("inter_sp_loss: no different-class entries in the pool for class " +
                          std::to_string(query_labels[i]));
    }
    mask[i * p + pos] = onehot[i * p + pos] = Real(1);
    weight[i] = Real(1);
    ++result.used;
  }
  if (result.used == 0) {
    result.loss = tape.constant(Tensor::scalar(Real(0)));
    return result;
  }

  const Var q = normalize_rows(queries);
  const Var g = normalize_rows(pool.features);
  const Var logits = scale(matmul(q, transpose(g)), static_cast<Real>(1.0 / temperature));
  const Var per_query =
      logsumexp_rows(logits, tape.constant(Tensor(b, p, std::move(mask)))) -
      sum_cols(logits * tape.constant(Tensor(b, p, std::move(onehot))));
  const Var weighted = per_query * tape.constant(Tensor(b, 1, std::move(weight)));
  result.loss = scale(sum(weighted), Real(1) / static_cast<Real>(result.used));
  return result;
}

Var total_generator_objective(const GeneratorLossParts& parts, const LossWeights& weights) {
  if (!parts.adv.valid()) throw ContractError("total_generator_objective: adversarial term missing");
  Var total = parts.adv;
  auto add_term = [&](Var term, double lambda, const char* name) {
    if (lambda == 0) return;
    if (!term.valid()) {
      throw ContractError(std::string("total_generator_objective: ") + name +
                          " term missing but weighted");
    }
    total = total + scale(term, static_cast<Real>(lambda));
  };
  add_term(parts.cls, weights.lambda_cls, "classifier-consistency");
  add_term(parts.intra, weights.lambda_sd, "intra-class diverging");
  add_term(parts.inter, weights.lambda_sp, "inter-class structure");
  return total;
}

}  // namespace rfs
