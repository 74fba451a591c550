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

#include "rfs/gradsuite.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "rfs/errors.hpp"
#include "rfs/gradcheck.hpp"
#include "rfs/losses.hpp"
#include "rfs/models.hpp"

namespace rfs {
namespace {

// Small shapes keep the suite fast while exercising every code path.
constexpr std::size_t kDz = 3, kDw = 3, kDf = 4, kH = 6, kB = 4, kN = 3;
constexpr double kKinkMargin = 1e-3;
constexpr int kMaxAttempts = 200;

Tensor randn(std::size_t r, std::size_t c, double mean, double sd, Rng& rng) {
  std::normal_distribution<double> d(mean, sd);
  std::vector<Real> v(r * c);
  for (Real& x : v) x = static_cast<Real>(d(rng));
  return Tensor(r, c, std::move(v));
}

Tensor abs_randn(std::size_t r, std::size_t c, double mean, double sd, Rng& rng) {
  std::vector<Real> v = randn(r, c, mean, sd, rng).to_vector();
  for (Real& x : v) x = std::abs(x) + Real(0.05);
  return Tensor(r, c, std::move(v));
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  return kernels::add(kernels::matmul(x, w), repeat_rows(b, x.rows()));
}

bool clear_of_kinks(const Tensor& pre) {
  for (Real v : pre.values()) {
    if (std::abs(static_cast<double>(v)) < kKinkMargin) return false;
  }
  return true;
}

Tensor leaky(const Tensor& x) {
  std::vector<Real> v = x.to_vector();
  for (Real& e : v) e = e >= 0 ? e : e * kLeakySlope;
  return Tensor(x.rows(), x.cols(), std::move(v));
}

// Both layers of a two-layer net on x, with the second pre-activation checked
// only when the output passes through a kink (generator ReLU).
bool net_clear(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
               const Tensor& b2, bool check_output) {
  const Tensor a1 = affine(x, w1, b1);
  if (!clear_of_kinks(a1)) return false;
  return !check_output || clear_of_kinks(affine(leaky(a1), w2, b2));
}

GeneratorParams random_generator(Rng& rng) {
  GeneratorParams g;
  g.w1 = randn(kDz + kDw, kH, 0, 0.6, rng);
  g.b1 = randn(1, kH, 0, 0.3, rng);
  g.w2 = randn(kH, kDf, 0, 0.6, rng);
  g.b2 = randn(1, kDf, 0.8, 0.3, rng);
  return g;
}

DiscriminatorParams random_critic(Rng& rng) {
  DiscriminatorParams d;
  d.w1 = randn(kDf + kDw, kH, 0, 0.6, rng);
  d.b1 = randn(1, kH, 0, 0.3, rng);
  d.w2 = randn(kH, 1, 0, 0.6, rng);
  d.b2 = randn(1, 1, 0, 0.3, rng);
  return d;
}

ClassifierParams random_classifier(Rng& rng) {
  ClassifierParams c;
  c.classes = {0, 1, 2, kBackground};
  c.weight = randn(kDf, 4, 0, 0.8, rng);
  c.bias = randn(1, 4, 0, 0.3, rng);
  return c;
}

std::vector<ClassId> random_labels(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<ClassId> out(n);
  for (auto& y : out) y = pick(rng);
  return out;
}

GeneratorVars generator_from(std::span<const Var> v) { return {v[0], v[1], v[2], v[3]}; }
DiscriminatorVars critic_from(std::span<const Var> v) { return {v[0], v[1], v[2], v[3]}; }

struct Instance {
  std::vector<Tensor> inputs;
  ScalarFn fn;
};

bool critic_clear(const DiscriminatorParams& d, const Tensor& f, const Tensor& w) {
  return net_clear(kernels::concat_cols(f, w), d.w1, d.b1, d.w2, d.b2, false);
}

bool generator_clear(const GeneratorParams& g, const Tensor& z, const Tensor& w) {
  return net_clear(kernels::concat_cols(z, w), g.w1, g.b1, g.w2, g.b2, true);
}

Tensor stacked_noise(const Tensor& q, Rng& rng) {
  Tensor z = kernels::concat_rows(q, kernels::add(q, randn(kB, kDz, 0, 0.05, rng)));
  for (std::size_t k = 0; k < kN; ++k) z = kernels::concat_rows(z, randn(kB, kDz, 0, 1, rng));
  return z;
}

// -- families -----------------------------------------------------------------

std::optional<Instance> critic_instance(Rng& rng, bool penalty_only) {
  const DiscriminatorParams d = random_critic(rng);
  const Tensor real = abs_randn(kB, kDf, 1.0, 0.5, rng);
  const Tensor fake = abs_randn(kB, kDf, 0.8, 0.5, rng);
  const Tensor w = randn(kB, kDw, 0, 1, rng);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Real> mu_v(kB);
  for (Real& m : mu_v) m = static_cast<Real>(u(rng));
  const Tensor mu(kB, 1, mu_v);
  std::vector<Real> fh(kB * kDf);
  for (std::size_t i = 0; i < kB; ++i) {
    for (std::size_t j = 0; j < kDf; ++j) fh[i * kDf + j] = mu[i] * real(i, j) + (1 - mu[i]) * fake(i, j);
  }
  const Tensor fhat(kB, kDf, std::move(fh));
  if (!critic_clear(d, real, w) || !critic_clear(d, fake, w) || !critic_clear(d, fhat, w)) {
    return std::nullopt;
  }
  Instance inst;
  inst.inputs = {d.w1, d.b1, d.w2, d.b2, fake};
  inst.fn = [=](Tape& t, std::span<const Var> v) {
    const CriticLoss cl = critic_loss(critic_from(v), t.constant(real), v[4], t.constant(w), 10.0, mu);
    return penalty_only ? cl.penalty : cl.total;
  };
  return inst;
}

std::optional<Instance> adversarial_instance(Rng& rng) {
  const GeneratorParams g = random_generator(rng);
  const DiscriminatorParams d = random_critic(rng);
  const Tensor z = randn(kB, kDz, 0, 1, rng);
  const Tensor w = randn(kB, kDw, 0, 1, rng);
  if (!generator_clear(g, z, w) || !critic_clear(d, generate(g, z, w), w)) return std::nullopt;
  Instance inst;
  inst.inputs = g.values();
  inst.fn = [=](Tape& t, std::span<const Var> v) {
    const Var f = generator_forward(generator_from(v), t.constant(z), t.constant(w));
    return generator_adv_loss(bind(t, d, Binding::kConstant), f, t.constant(w));
  };
  return inst;
}

std::optional<Instance> cls_instance(Rng& rng) {
  const GeneratorParams g = random_generator(rng);
  const ClassifierParams c = random_classifier(rng);
  const Tensor z = randn(kB, kDz, 0, 1, rng);
  const Tensor w = randn(kB, kDw, 0, 1, rng);
  const auto labels = random_labels(kB, rng);
  if (!generator_clear(g, z, w)) return std::nullopt;
  Instance inst;
  inst.inputs = g.values();
  inst.fn = [=](Tape& t, std::span<const Var> v) {
    const Var f = generator_forward(generator_from(v), t.constant(z), t.constant(w));
    return cls_consistency_loss(bind(t, c, Binding::kConstant), f, labels);
  };
  return inst;
}

std::optional<Instance> intra_instance(Rng& rng) {
  Instance inst;
  inst.inputs.push_back(abs_randn(kB, kDf, 1.0, 0.5, rng));
  inst.inputs.push_back(abs_randn(kB, kDf, 1.0, 0.5, rng));
  for (std::size_t k = 0; k < kN; ++k) inst.inputs.push_back(abs_randn(kB, kDf, 1.0, 0.5, rng));
  inst.fn = [](Tape&, std::span<const Var> v) {
    std::vector<Var> negs(v.begin() + 2, v.end());
    return intra_sd_loss(v[0], v[1], negs, 0.1);
  };
  return inst;
}

std::optional<Instance> inter_instance(Rng& rng) {
  const Tensor q = abs_randn(kB, kDf, 1.0, 0.5, rng);
  const auto labels = random_labels(kB, rng);
  LabeledFeatures props;
  props.features = abs_randn(3, kDf, 1.0, 0.5, rng);
  props.labels = {0, 1, 2};
  const Tensor bg = abs_randn(2, kDf, 0.1, 0.1, rng);
  const std::uint64_t pick_seed = rng();
  Instance inst;
  inst.inputs = {q};
  inst.fn = [=](Tape&, std::span<const Var> v) {
    Rng local(pick_seed);
    const HybridPool pool = build_hybrid_pool(v[0], labels, props, bg);
    return inter_sp_loss(v[0], labels, pool, 0.1, PositivePolicy::kPreferRealProposal, local).loss;
  };
  return inst;
}

std::optional<Instance> composite_instance(Rng& rng) {
  const GeneratorParams g = random_generator(rng);
  const DiscriminatorParams d = random_critic(rng);
  const ClassifierParams c = random_classifier(rng);
  const Tensor z = stacked_noise(randn(kB, kDz, 0, 1, rng), rng);
  Tensor w1 = randn(kB, kDw, 0, 1, rng);
  Tensor w = w1;
  for (std::size_t k = 0; k < kN + 1; ++k) w = kernels::concat_rows(w, w1);
  const auto labels = random_labels(kB, rng);
  LabeledFeatures props;
  props.features = abs_randn(3, kDf, 1.0, 0.5, rng);
  props.labels = {0, 1, 2};
  const Tensor bg = abs_randn(2, kDf, 0.1, 0.1, rng);
  if (!generator_clear(g, z, w)) return std::nullopt;
  const Tensor f = generate(g, z, w);
  if (!critic_clear(d, kernels::slice_rows(f, 0, kB), w1)) return std::nullopt;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    Real n2 = 0;
    for (Real x : f.row_span(i)) n2 += x * x;
    if (n2 < Real(1e-4)) return std::nullopt;
  }
  const std::uint64_t pick_seed = rng();
  LossWeights lw;
  lw.lambda_cls = 0.1;
  lw.lambda_sd = 0.1;
  lw.lambda_sp = 0.1;
  Instance inst;
  inst.inputs = g.values();
  inst.fn = [=](Tape& t, std::span<const Var> v) {
    Rng local(pick_seed);
    const Var all = generator_forward(generator_from(v), t.constant(z), t.constant(w));
    const Var q = slice_rows(all, 0, kB);
    std::vector<Var> negs;
    for (std::size_t k = 0; k < kN; ++k) negs.push_back(slice_rows(all, (2 + k) * kB, kB));
    GeneratorLossParts parts;
    parts.adv = generator_adv_loss(bind(t, d, Binding::kConstant), q, t.constant(w1));
    parts.cls = cls_consistency_loss(bind(t, c, Binding::kConstant), q, labels);
    parts.intra = intra_sd_loss(q, slice_rows(all, kB, kB), negs, lw.temperature);
    const HybridPool pool = build_hybrid_pool(q, labels, props, bg);
    parts.inter = inter_sp_loss(q, labels, pool, lw.temperature, PositivePolicy::kPreferRealProposal, local).loss;
    return total_generator_objective(parts, lw);
  };
  return inst;
}

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(const GradSuiteOptions& options) {
  using Maker = std::function<std::optional<Instance>(Rng&)>;
  const std::vector<std::pair<std::string, Maker>> families = {
      {"critic_wgan_gp", [](Rng& r) { return critic_instance(r, false); }},
      {"gradient_penalty", [](Rng& r) { return critic_instance(r, true); }},
      {"generator_adversarial", adversarial_instance},
      {"classifier_consistency", cls_instance},
      {"intra_semantic_diverging", intra_instance},
      {"inter_structure_preserving", inter_instance},
      {"generator_composite", composite_instance},
  };
  GradCheckOptions gc;
  gc.eps = options.eps;
  gc.corrupt_analytic = options.corrupt_analytic;

  std::vector<GradSuiteEntry> out;
  for (std::size_t f = 0; f < families.size(); ++f) {
    Rng rng(derive_seed(options.seed, f));
    GradSuiteEntry entry;
    entry.name = families[f].first;
    for (std::size_t i = 0; i < options.instances; ++i) {
      std::optional<Instance> inst;
      for (int attempt = 0; attempt < kMaxAttempts && !inst; ++attempt) inst = families[f].second(rng);
      if (!inst) throw OracleError(entry.name + ": could not draw an instance clear of activation kinks");
      const GradCheckResult r = finite_diff_check(inst->fn, inst->inputs, gc);
      entry.entries += r.entries_checked;
      entry.max_rel_error = std::max(entry.max_rel_error, r.max_rel_error);
      ++entry.instances;
    }
    entry.passed = entry.max_rel_error < options.tolerance;
    out.push_back(entry);
  }
  return out;
}

}  // namespace rfs
