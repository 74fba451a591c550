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

// Train / synthesize / classify / evaluate on a region-feature benchmark.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rfs/data.hpp"
#include "rfs/losses.hpp"
#include "rfs/models.hpp"
#include "rfs/optim.hpp"
#include "rfs/sampling.hpp"

namespace rfs {

/// Which entries the inter-class loss contrasts against.
enum class PoolMode { kHybrid, kSynthOnly };

/// How the unseen classifier is trained before the merge.
enum class UnseenHead {
  kSeparate,       // own softmax over the unseen classes only
  kJoint,          // next to the fixed seen columns, synthesized features only
  kJointWithReal,  // as kJoint, plus real seen and background features as negatives
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  std::size_t critic_steps = 5;
  AdamConfig adam;
  std::size_t hidden_dim = 256;
  LossWeights weights;
  NoisePairConfig noise;
  PoolMode pool = PoolMode::kHybrid;
  PositivePolicy positive_policy = PositivePolicy::kPreferRealProposal;
  std::size_t synth_per_class = 500;
  UnseenHead unseen_head = UnseenHead::kJointWithReal;

  std::size_t classifier_epochs = 40;
  std::size_t classifier_batch_size = 64;
  double classifier_lr = 1e-3;
  /// Stop classifier training after this many epochs without a train-accuracy gain.
  std::size_t classifier_patience = 5;

  std::uint64_t seed = 1;

  void validate() const;
};

/// Settings sized for the bundled synthetic benchmark on a single core.
TrainConfig desk_scale_config();

ModelDims model_dims(const Benchmark& bench, const TrainConfig& cfg);

struct EpochLog {
  std::size_t epoch = 0;
  double critic_loss = 0;
  double adv = 0;
  double l_cs = 0;
  double l_sd = 0;
  double l_sp = 0;
  double total = 0;
  double wasserstein = 0;  // kept in memory only
};

struct SynthesizerResult {
  GeneratorParams generator;
  DiscriminatorParams discriminator;
  std::vector<EpochLog> log;
};

enum class EvalMode { kZsd, kGzsd };
const char* mode_name(EvalMode mode);
EvalMode parse_mode(const std::string& text);

struct EvalReport {
  EvalMode mode = EvalMode::kGzsd;
  /// Top-1 accuracy in percent for every class present in the evaluated test set.
  std::map<ClassId, double> per_class_accuracy;
  double seen_accuracy = 0;    // S
  double unseen_accuracy = 0;  // U
  double harmonic_mean = 0;    // HM
  double zsd_accuracy = 0;     // unseen-only space; filled in ZSD mode
  std::vector<ClassId> seen_classes;
  std::vector<ClassId> unseen_classes;
  /// confusion[i][j]: test samples of true_classes[i] predicted as predicted_classes[j].
  std::vector<ClassId> true_classes;
  std::vector<ClassId> predicted_classes;
  std::vector<std::vector<std::size_t>> confusion;
};

/// 2SU / (S + U), and 0 when either is 0.
double harmonic_mean(double s, double u);

/// Softmax cross-entropy training of a linear classifier over the given classes.
/// With 'frozen', the softmax also spans the frozen classifier's columns, which
/// contribute fixed logits and receive no updates.
ClassifierParams train_classifier(const LabeledFeatures& data, std::vector<ClassId> classes,
                                  const TrainConfig& cfg, std::uint64_t seed,
                                  const ClassifierParams* frozen = nullptr);
double classifier_accuracy(const ClassifierParams& c, const LabeledFeatures& data);
/// Mean cross-entropy of the classifier on labeled data.
double classifier_loss(const ClassifierParams& c, const LabeledFeatures& data);

/// Seen classes plus background, trained on seen features and the background pool.
ClassifierParams pretrain_seen_classifier(const Benchmark& bench, const TrainConfig& cfg);

/// Alternating critic / generator optimization. The seen classifier stays frozen.
SynthesizerResult train_synthesizer(const Benchmark& bench, const ClassifierParams& seen,
                                    const TrainConfig& cfg);

/// count_per_class features per class, each from fresh standard-normal noise.
LabeledFeatures synthesize_unseen(const GeneratorParams& g,
                                  const std::map<ClassId, Tensor>& semantic_vectors,
                                  std::size_t count_per_class, std::uint64_t seed);

/// Trains unseen columns on synthesized features. When 'seen' is given, they are
/// trained next to its fixed columns so that the merged logits share one scale;
/// 'negatives' (labeled with seen classes or background) then join the training set.
ClassifierParams train_unseen_classifier(const LabeledFeatures& synth, const TrainConfig& cfg,
                                         const ClassifierParams* seen = nullptr,
                                         const LabeledFeatures* negatives = nullptr);

/// Seen columns (background included) are copied first and unchanged, then the unseen ones.
ClassifierParams merge_classifiers(const ClassifierParams& seen, const ClassifierParams& unseen);

/// Restrict a classifier to a subset of its columns, in the given order.
ClassifierParams select_classes(const ClassifierParams& c, std::span<const ClassId> classes);

EvalReport evaluate(const ClassifierParams& merged, const Benchmark& bench, EvalMode mode);

struct PipelineResult {
  ModelParams params;
  std::vector<EpochLog> log;
  LabeledFeatures synthesized;
  EvalReport zsd;
  EvalReport gzsd;
};

PipelineResult run_pipeline(const Benchmark& bench, const TrainConfig& cfg);

/// Everything after synthesizer training, for a given generator.
PipelineResult finish_pipeline(const Benchmark& bench, const TrainConfig& cfg,
                               ClassifierParams seen, SynthesizerResult synth);

enum class Variant { kBaseline, kSd, kSdSps, kSdSp };
const char* variant_name(Variant v);
Variant parse_variant(const std::string& text);
std::vector<Variant> all_variants();
TrainConfig apply_variant(TrainConfig cfg, Variant v);

struct AblationRow {
  Variant variant = Variant::kBaseline;
  EvalReport zsd;
  EvalReport gzsd;
};

/// Trains every variant from the same seed. Variants run on up to 'workers'
/// threads; results do not depend on the worker count.
std::vector<AblationRow> run_ablation(const Benchmark& bench, const TrainConfig& cfg,
                                      std::span<const Variant> variants, std::size_t workers = 1);

void write_training_log(const std::vector<EpochLog>& log, std::ostream& os);
void write_report_csv(const EvalReport& report, std::ostream& os);
void write_summary(const EvalReport& report, std::ostream& os);
void write_ablation_table(const std::vector<AblationRow>& rows, std::ostream& os);

}  // namespace rfs
