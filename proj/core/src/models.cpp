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

#include "rfs/models.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "rfs/errors.hpp"

namespace rfs {

void ModelDims::validate() const {
  if (noise_dim == 0 || semantic_dim == 0 || feature_dim == 0 || hidden_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
}

std::ptrdiff_t ClassifierParams::column_of(ClassId id) const {
  auto it = std::find(classes.begin(), classes.end(), id);
  return it == classes.end() ? -1 : std::distance(classes.begin(), it);
}

namespace {

Var bind_one(Tape& tape, const Tensor& t, Binding binding) {
  return binding == Binding::kVariable ? tape.variable(t) : tape.constant(t);
}

void require_cols(Var v, std::size_t cols, const char* what) {
  if (v.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(cols) +
                         " columns, got " + v.value().shape_string());
  }
}

Tensor normal_matrix(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<Real> v(rows * cols);
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return Tensor(rows, cols, std::move(v));
}

constexpr double kInitStd = 0.02;

}  // namespace

GeneratorVars bind(Tape& tape, const GeneratorParams& p, Binding binding) {
  return {bind_one(tape, p.w1, binding), bind_one(tape, p.b1, binding),
          bind_one(tape, p.w2, binding), bind_one(tape, p.b2, binding)};
}

DiscriminatorVars bind(Tape& tape, const DiscriminatorParams& p, Binding binding) {
  return {bind_one(tape, p.w1, binding), bind_one(tape, p.b1, binding),
          bind_one(tape, p.w2, binding), bind_one(tape, p.b2, binding)};
}

ClassifierVars bind(Tape& tape, const ClassifierParams& p, Binding binding) {
  return {bind_one(tape, p.weight, binding), bind_one(tape, p.bias, binding), p.classes};
}

Var dense(Var x, Var w, Var b) {
  return matmul(x, w) + broadcast_rows(b, x.rows());
}

Var generator_forward(const GeneratorVars& g, Var z, Var w) {
  if (z.rows() != w.rows()) {
    throw DimensionError("generator_forward: " + std::to_string(z.rows()) + " noise rows vs " +
                         std::to_string(w.rows()) + " semantic rows");
  }
  require_cols(concat_cols(z, w), g.w1.rows(), "generator_forward input");
  const Var h = leaky_relu(dense(concat_cols(z, w), g.w1, g.b1), kLeakySlope);
  return relu(dense(h, g.w2, g.b2));
}

Var discriminator_forward(const DiscriminatorVars& d, Var f, Var w) {
  if (f.rows() != w.rows()) {
    throw DimensionError("discriminator_forward: " + std::to_string(f.rows()) +
                         " feature rows vs " + std::to_string(w.rows()) + " semantic rows");
  }
  const Var x = concat_cols(f, w);
  require_cols(x, d.w1.rows(), "discriminator_forward input");
  const Var h = leaky_relu(dense(x, d.w1, d.b1), kLeakySlope);
  return dense(h, d.w2, d.b2);
}

Var classifier_forward(const ClassifierVars& c, Var f) {
  require_cols(f, c.weight.rows(), "classifier_forward input");
  return dense(f, c.weight, c.bias);
}

Tensor generate(const GeneratorParams& g, const Tensor& z, const Tensor& w) {
  Tape tape;
  return generator_forward(bind(tape, g, Binding::kConstant), tape.constant(z), tape.constant(w))
      .value();
}

Tensor critic_scores(const DiscriminatorParams& d, const Tensor& f, const Tensor& w) {
  Tape tape;
  return discriminator_forward(bind(tape, d, Binding::kConstant), tape.constant(f),
                               tape.constant(w))
      .value();
}

Tensor classifier_logits(const ClassifierParams& c, const Tensor& f) {
  if (f.cols() != c.weight.rows()) {
    throw DimensionError("classifier_logits: feature dim " + std::to_string(f.cols()) +
                         " vs classifier input " + std::to_string(c.weight.rows()));
  }
  // Same arithmetic as classifier_forward without a tape.
  const Tensor prod = kernels::matmul(f, c.weight);
  std::vector<Real> out = prod.to_vector();
  const std::size_t k = c.weight.cols();
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = out[i * k + j] + c.bias[j];
  return Tensor(f.rows(), k, std::move(out));
}

GeneratorParams init_generator(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  Rng rng(derive_seed(seed, 101));
  GeneratorParams p;
  p.w1 = normal_matrix(dims.noise_dim + dims.semantic_dim, dims.hidden_dim, kInitStd, rng);
  p.b1 = Tensor(1, dims.hidden_dim);
  p.w2 = normal_matrix(dims.hidden_dim, dims.feature_dim, kInitStd, rng);
  p.b2 = Tensor(1, dims.feature_dim);
  return p;
}

DiscriminatorParams init_discriminator(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  Rng rng(derive_seed(seed, 202));
  DiscriminatorParams p;
  p.w1 = normal_matrix(dims.feature_dim + dims.semantic_dim, dims.hidden_dim, kInitStd, rng);
  p.b1 = Tensor(1, dims.hidden_dim);
  p.w2 = normal_matrix(dims.hidden_dim, 1, kInitStd, rng);
  p.b2 = Tensor(1, 1);
  return p;
}

ClassifierParams init_classifier(std::size_t feature_dim, std::vector<ClassId> classes,
                                 std::uint64_t seed) {
  if (feature_dim == 0 || classes.empty()) {
    throw ConfigError("classifier needs a positive feature dim and at least one class");
  }
  auto sorted = classes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ContractError("classifier classes must be distinct");
  }
  Rng rng(derive_seed(seed, 303));
  ClassifierParams p;
  p.weight = normal_matrix(feature_dim, classes.size(), kInitStd, rng);
  p.bias = Tensor(1, classes.size());
  p.classes = std::move(classes);
  return p;
}

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  ModelParams m;
  m.dims = dims;
  m.seed = seed;
  m.generator = init_generator(dims, seed);
  m.discriminator = init_discriminator(dims, seed);
  return m;
}

Tensor repeat_rows(const Tensor& row, std::size_t count) {
  if (row.rows() != 1) throw DimensionError("repeat_rows expects a 1 x n tensor");
  std::vector<Real> out;
  out.reserve(count * row.cols());
  for (std::size_t i = 0; i < count; ++i) out.insert(out.end(), row.values().begin(), row.values().end());
  return Tensor(count, row.cols(), std::move(out));
}

}  // namespace rfs
