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

// Generator, Wasserstein critic and linear classifiers.
//
// Parameters are plain Tensors. A forward pass binds them to a Tape, either as
// variables (when their gradient is wanted) or as constants (frozen).

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rfs/tape.hpp"
#include "rfs/types.hpp"

namespace rfs {

inline constexpr Real kLeakySlope = Real(0.2);

struct ModelDims {
  std::size_t noise_dim = 16;
  std::size_t semantic_dim = 16;
  std::size_t feature_dim = 32;
  std::size_t hidden_dim = 256;

  void validate() const;
};

/// Two fully-connected layers: [z, w] -> H (LeakyReLU) -> D_f (ReLU).
struct GeneratorParams {
  Tensor w1, b1, w2, b2;

  std::vector<Tensor*> list() { return {&w1, &b1, &w2, &b2}; }
  std::vector<Tensor> values() const { return {w1, b1, w2, b2}; }
};

/// Two fully-connected layers: [f, w] -> H (LeakyReLU) -> 1, no output squashing.
struct DiscriminatorParams {
  Tensor w1, b1, w2, b2;

  std::vector<Tensor*> list() { return {&w1, &b1, &w2, &b2}; }
  std::vector<Tensor> values() const { return {w1, b1, w2, b2}; }
};

/// Linear layer D_f -> K. Column k scores classes[k]; kBackground may be one of them.
struct ClassifierParams {
  Tensor weight;  // D_f x K
  Tensor bias;    // 1 x K
  std::vector<ClassId> classes;

  std::size_t num_classes() const { return classes.size(); }
  /// Column index of a class, or -1.
  std::ptrdiff_t column_of(ClassId id) const;
  std::vector<Tensor*> list() { return {&weight, &bias}; }
};

struct ModelParams {
  ModelDims dims;
  std::uint64_t seed = 0;
  GeneratorParams generator;
  DiscriminatorParams discriminator;
  ClassifierParams seen_classifier;
  ClassifierParams unseen_classifier;
  ClassifierParams merged_classifier;
};

enum class Binding { kVariable, kConstant };

struct GeneratorVars {
  Var w1, b1, w2, b2;
  std::vector<Var> list() const { return {w1, b1, w2, b2}; }
};

struct DiscriminatorVars {
  Var w1, b1, w2, b2;
  std::vector<Var> list() const { return {w1, b1, w2, b2}; }
};

struct ClassifierVars {
  Var weight, bias;
  std::vector<ClassId> classes;
};

GeneratorVars bind(Tape& tape, const GeneratorParams& p, Binding binding);
DiscriminatorVars bind(Tape& tape, const DiscriminatorParams& p, Binding binding);
ClassifierVars bind(Tape& tape, const ClassifierParams& p, Binding binding);

/// Fully-connected layer x * w + b with the bias broadcast over rows.
Var dense(Var x, Var w, Var b);

/// Batched forward: z is B x D_z, w is B x D_w; returns B x D_f, all entries >= 0.
Var generator_forward(const GeneratorVars& g, Var z, Var w);
/// Batched critic scores, B x 1.
Var discriminator_forward(const DiscriminatorVars& d, Var f, Var w);
/// Logits, B x K.
Var classifier_forward(const ClassifierVars& c, Var f);

// Tape-free conveniences for inference.
Tensor generate(const GeneratorParams& g, const Tensor& z, const Tensor& w);
Tensor critic_scores(const DiscriminatorParams& d, const Tensor& f, const Tensor& w);
Tensor classifier_logits(const ClassifierParams& c, const Tensor& f);

/// Weights ~ N(0, 0.02^2), biases 0. Deterministic per seed.
GeneratorParams init_generator(const ModelDims& dims, std::uint64_t seed);
DiscriminatorParams init_discriminator(const ModelDims& dims, std::uint64_t seed);
ClassifierParams init_classifier(std::size_t feature_dim, std::vector<ClassId> classes,
                                 std::uint64_t seed);
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

/// Row-repeat a 1 x n tensor.
Tensor repeat_rows(const Tensor& row, std::size_t count);

}  // namespace rfs
