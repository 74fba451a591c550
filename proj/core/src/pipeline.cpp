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

#include "rfs/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "rfs/errors.hpp"
#include "rfs/tape.hpp"

namespace rfs {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (critic_steps < 1) throw ConfigError("train.critic_steps must be >= 1");
  if (hidden_dim < 1) throw ConfigError("train.hidden_dim must be >= 1");
  if (synth_per_class < 1) throw ConfigError("train.synth_per_class must be >= 1");
  if (classifier_epochs < 1) throw ConfigError("train.classifier_epochs must be >= 1");
  if (classifier_batch_size < 1) throw ConfigError("train.classifier_batch_size must be >= 1");
  if (!(adam.learning_rate > 0)) throw ConfigError("train.lr must be > 0");
  if (!(classifier_lr > 0)) throw ConfigError("train.classifier_lr must be > 0");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1) || !(adam.beta2 >= 0 && adam.beta2 < 1)) {
    throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  weights.validate();
  noise.validate();
}

TrainConfig desk_scale_config() {
  // The reference step size of 1e-4 barely moves the generator in 30 short
  // epochs on this benchmark; a narrower, faster schedule converges instead.
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.adam.learning_rate = 1e-3;
  cfg.hidden_dim = 128;
  cfg.classifier_lr = 1e-2;
  cfg.classifier_patience = 10;
  return cfg;
}

ModelDims model_dims(const Benchmark& bench, const TrainConfig& cfg) {
  ModelDims dims;
  dims.noise_dim = cfg.noise.noise_dim;
  dims.semantic_dim = bench.semantic_dim();
  dims.feature_dim = bench.feature_dim();
  dims.hidden_dim = cfg.hidden_dim;
  dims.validate();
  return dims;
}

const char* mode_name(EvalMode mode) { return mode == EvalMode::kZsd ? "zsd" : "gzsd"; }

EvalMode parse_mode(const std::string& text) {
  if (text == "zsd") return EvalMode::kZsd;
  if (text == "gzsd") return EvalMode::kGzsd;
  throw ConfigError("invalid mode '" + text + "' (expected zsd or gzsd)");
}

double harmonic_mean(double s, double u) {
  if (!(s >= 0) || !(u >= 0)) throw ContractError("harmonic_mean: inputs must be non-negative");
  if (s == 0 || u == 0) return 0;
  return 2 * s * u / (s + u);
}

// -- classifiers ----------------------------------------------------------------

namespace {

std::vector<std::size_t> target_columns(const ClassifierParams& c, const LabeledFeatures& data) {
  std::vector<std::size_t> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto col = c.column_of(data.labels[i]);
    if (col < 0) {
      throw ContractError("label " + std::to_string(data.labels[i]) + " has no classifier column");
    }
    out[i] = static_cast<std::size_t>(col);
  }
  return out;
}

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
  std::vector<std::size_t> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row_span(i);
    out[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace

double classifier_accuracy(const ClassifierParams& c, const LabeledFeatures& data) {
  if (data.size() == 0) throw DataError("classifier_accuracy: empty data");
  const auto targets = target_columns(c, data);
  const auto pred = argmax_rows(classifier_logits(c, data.features));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == targets[i];
  return 100.0 * double(hit) / double(pred.size());
}

double classifier_loss(const ClassifierParams& c, const LabeledFeatures& data) {
  if (data.size() == 0) throw DataError("classifier_loss: empty data");
  const auto targets = target_columns(c, data);
  Tape tape;
  const Var logits = tape.constant(classifier_logits(c, data.features));
  return static_cast<double>(softmax_cross_entropy(logits, targets).value().item());
}

ClassifierParams train_classifier(const LabeledFeatures& data, std::vector<ClassId> classes,
                                  const TrainConfig& cfg, std::uint64_t seed,
                                  const ClassifierParams* frozen) {
  if (classes.empty()) throw ContractError("train_classifier: no classes");
  if (data.size() == 0 || !data.has_labels()) throw DataError("train_classifier: no labeled data");
  for (ClassId c : classes) {
    if (std::find(data.labels.begin(), data.labels.end(), c) == data.labels.end()) {
      throw DataError("train_classifier: no training samples for class " + std::to_string(c));
    }
  }
  if (frozen) {
    if (frozen->weight.rows() != data.dim()) throw DimensionError("train_classifier: frozen classifier dimension");
    for (ClassId c : classes) {
      if (frozen->column_of(c) >= 0) throw ContractError("train_classifier: class " + std::to_string(c) + " is frozen");
    }
  }
  ClassifierParams params = init_classifier(data.dim(), std::move(classes), seed);
  const std::size_t offset = frozen ? frozen->num_classes() : 0;
  // Samples of frozen classes act as negatives for the trainable columns.
  std::vector<std::size_t> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto own = params.column_of(data.labels[i]);
    const auto fixed = frozen ? frozen->column_of(data.labels[i]) : -1;
    if (own < 0 && fixed < 0) {
      throw ContractError("label " + std::to_string(data.labels[i]) + " has no classifier column");
    }
    targets[i] = own >= 0 ? offset + static_cast<std::size_t>(own) : static_cast<std::size_t>(fixed);
  }
  const Tensor frozen_logits = frozen ? classifier_logits(*frozen, data.features) : Tensor();
  auto accuracy = [&] {
    const Tensor own = classifier_logits(params, data.features);
    const auto pred = argmax_rows(frozen ? kernels::concat_cols(frozen_logits, own) : own);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == targets[i];
    return 100.0 * double(hit) / double(pred.size());
  };

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.classifier_lr;
  adam_cfg.beta1 = 0.9;
  adam_cfg.beta2 = 0.999;
  Adam adam(adam_cfg);
  Rng rng(derive_seed(seed, 1));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best = -1;
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < cfg.classifier_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.classifier_batch_size) {
      const std::size_t n = std::min(cfg.classifier_batch_size, order.size() - start);
      std::vector<std::size_t> rows(order.begin() + start, order.begin() + start + n);
      std::vector<std::size_t> batch_targets(n);
      for (std::size_t i = 0; i < n; ++i) batch_targets[i] = targets[rows[i]];
      Tape tape;
      const ClassifierVars v = bind(tape, params, Binding::kVariable);
      const Var x = tape.constant(gather_rows(data.features, rows));
      Var logits = classifier_forward(v, x);
      if (frozen) logits = concat_cols(tape.constant(gather_rows(frozen_logits, rows)), logits);
      const Var loss = softmax_cross_entropy(logits, batch_targets);
      const Var wrt[] = {v.weight, v.bias};
      const auto grads = tape.gradient_values(loss, wrt);
      adam.step(params.list(), grads);
    }
    const double acc = accuracy();
    if (acc > best) {
      best = acc;
      stale = 0;
    } else if (cfg.classifier_patience > 0 && ++stale >= cfg.classifier_patience) {
      break;
    }
  }
  return params;
}

ClassifierParams pretrain_seen_classifier(const Benchmark& bench, const TrainConfig& cfg) {
  std::set<ClassId> present(bench.seen_train.labels.begin(), bench.seen_train.labels.end());
  if (bench.seen.size() < 2 || present.size() < 2) {
    throw ContractError("pretrain_seen_classifier: needs at least two seen classes with data");
  }
  std::vector<ClassId> classes = bench.seen_ids();
  LabeledFeatures data = bench.seen_train;
  if (bench.background.size() > 0) {
    classes.push_back(kBackground);
    data = concat(data, bench.background);
  }
  return train_classifier(data, std::move(classes), cfg, derive_seed(cfg.seed, 1));
}

// -- synthesizer ----------------------------------------------------------------

namespace {

struct ClassTable {
  Tensor semantic;  // K x D_w
  std::map<ClassId, std::size_t> row_of;

  explicit ClassTable(const std::map<ClassId, Tensor>& vectors) {
    std::vector<Real> v;
    std::size_t d = 0;
    for (const auto& [id, w] : vectors) {
      row_of[id] = row_of.size();
      d = w.cols();
      auto s = w.values();
      v.insert(v.end(), s.begin(), s.end());
    }
    semantic = Tensor(vectors.size(), d, std::move(v));
  }

  Tensor rows_for(std::span<const ClassId> labels) const {
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = row_of.find(labels[i]);
      if (it == row_of.end()) throw ContractError("no semantic vector for class " + std::to_string(labels[i]));
      idx[i] = it->second;
    }
    return gather_rows(semantic, idx);
  }
};

Tensor stack(const std::vector<Tensor>& parts) {
  Tensor out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = kernels::concat_rows(out, parts[i]);
  return out;
}

std::string describe(const EpochLog& e) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "critic=%.6g adv=%.6g l_cs=%.6g l_sd=%.6g l_sp=%.6g", e.critic_loss,
                e.adv, e.l_cs, e.l_sd, e.l_sp);
  return buf;
}

}  // namespace

SynthesizerResult train_synthesizer(const Benchmark& bench, const ClassifierParams& seen,
                                    const TrainConfig& cfg) {
  cfg.validate();
  if (bench.seen.size() < 2) throw ContractError("train_synthesizer: needs at least two seen classes");
  if (seen.num_classes() == 0) throw ContractError("train_synthesizer: seen classifier is empty");
  const ModelDims dims = model_dims(bench, cfg);
  SynthesizerResult out;
  out.generator = init_generator(dims, cfg.seed);
  out.discriminator = init_discriminator(dims, cfg.seed);
  if (cfg.epochs == 0) return out;

  const LossWeights& lw = cfg.weights;
  const std::size_t B = cfg.batch_size;
  const std::size_t N = cfg.noise.negatives;
  const bool use_sd = lw.lambda_sd > 0;
  const bool use_sp = lw.lambda_sp > 0;
  const bool hybrid = cfg.pool == PoolMode::kHybrid;

  std::map<ClassId, Tensor> seen_vectors;
  for (const auto& c : bench.seen) seen_vectors.emplace(c.id, c.semantic);
  const ClassTable table(seen_vectors);

  std::map<ClassId, std::vector<std::size_t>> proposals_of;
  for (std::size_t i = 0; i < bench.proposals.size(); ++i) {
    proposals_of[bench.proposals.labels[i]].push_back(i);
  }

  const LabeledFeatures& train = bench.seen_train;
  const std::size_t n = train.size();
  const std::size_t iters = (n + B - 1) / B;

  Adam critic_opt(cfg.adam);
  Adam gen_opt(cfg.adam);
  Rng rng(derive_seed(cfg.seed, 4));
  std::uniform_int_distribution<std::size_t> pick_train(0, n - 1);

  auto draw_batch = [&](std::vector<std::size_t>& idx, std::vector<ClassId>& labels) {
    idx.resize(B);
    labels.resize(B);
    for (std::size_t i = 0; i < B; ++i) {
      idx[i] = pick_train(rng);
      labels[i] = train.labels[idx[i]];
    }
  };

  std::vector<std::size_t> idx;
  std::vector<ClassId> labels;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t it = 0; it < iters; ++it) {
      EpochLog step;
      try {
        for (std::size_t c = 0; c < cfg.critic_steps; ++c) {
          draw_batch(idx, labels);
          const Tensor real = gather_rows(train.features, idx);
          const Tensor w = table.rows_for(labels);
          const Tensor fake = generate(out.generator, sample_normal(B, dims.noise_dim, rng), w);
          Tape tape;
          const DiscriminatorVars dv = bind(tape, out.discriminator, Binding::kVariable);
          const CriticLoss cl = critic_loss(dv, tape.constant(real), tape.constant(fake),
                                            tape.constant(w), lw.gp_lambda, rng);
          const auto grads = tape.gradient_values(cl.total, dv.list());
          critic_opt.step(out.discriminator.list(), grads);
          step.critic_loss += cl.total.value().item() / double(cfg.critic_steps);
          step.wasserstein += cl.wasserstein.value().item() / double(cfg.critic_steps);
        }

        draw_batch(idx, labels);
        const Tensor w = table.rows_for(labels);
        Tensor z;
        if (use_sd) {
          const NoiseTripletBatch tb = sample_triplet_batch(cfg.noise, B, rng);
          z = stack({tb.query, tb.positive, tb.negatives});
        } else {
          z = sample_normal(B, dims.noise_dim, rng);
        }
        const Tensor wz = use_sd ? stack(std::vector<Tensor>(N + 2, w)) : w;

        Tape tape;
        const GeneratorVars gv = bind(tape, out.generator, Binding::kVariable);
        const DiscriminatorVars dc = bind(tape, out.discriminator, Binding::kConstant);
        const ClassifierVars cc = bind(tape, seen, Binding::kConstant);
        const Var f = generator_forward(gv, tape.constant(z), tape.constant(wz));
        const Var q = use_sd ? slice_rows(f, 0, B) : f;

        GeneratorLossParts parts;
        parts.adv = generator_adv_loss(dc, q, tape.constant(w));
        parts.cls = cls_consistency_loss(cc, q, labels);
        if (use_sd) {
          std::vector<Var> negs;
          for (std::size_t k = 0; k < N; ++k) negs.push_back(slice_rows(f, (2 + k) * B, B));
          parts.intra = intra_sd_loss(q, slice_rows(f, B, B), negs, lw.temperature);
          step.l_sd = parts.intra.value().item();
        }
        if (use_sp) {
          LabeledFeatures props;
          Tensor bgs;
          if (hybrid) {
            std::vector<std::size_t> prow;
            for (ClassId y : labels) {
              auto pit = proposals_of.find(y);
              if (pit == proposals_of.end()) continue;
              std::uniform_int_distribution<std::size_t> pick(0, pit->second.size() - 1);
              prow.push_back(pit->second[pick(rng)]);
            }
            props = gather(bench.proposals, prow);
            if (bench.background.size() > 0) {
              std::uniform_int_distribution<std::size_t> pick(0, bench.background.size() - 1);
              std::vector<std::size_t> brow(B);
              for (auto& r : brow) r = pick(rng);
              bgs = gather_rows(bench.background.features, brow);
            }
          }
          const HybridPool pool = build_hybrid_pool(q, labels, props, bgs);
          parts.inter = inter_sp_loss(q, labels, pool, lw.temperature, cfg.positive_policy, rng).loss;
          step.l_sp = parts.inter.value().item();
        }
        const Var total = total_generator_objective(parts, lw);
        step.adv = parts.adv.value().item();
        step.l_cs = parts.cls.value().item();
        step.total = total.value().item();
        const auto grads = tape.gradient_values(total, gv.list());
        gen_opt.step(out.generator.list(), grads);
      } catch (const NumericError& e) {
        throw NumericError("train_synthesizer: non-finite value at epoch " + std::to_string(epoch) +
                           " step " + std::to_string(it + 1) + " (" + describe(step) +
                           "): " + e.what());
      } catch (const ContractError& e) {
        throw NumericError("train_synthesizer: degenerate batch at epoch " + std::to_string(epoch) +
                           " step " + std::to_string(it + 1) + " (" + describe(step) +
                           "): " + e.what());
      }
      for (double v : {step.critic_loss, step.adv, step.l_cs, step.l_sd, step.l_sp, step.total}) {
        if (!std::isfinite(v)) {
          throw NumericError("train_synthesizer: non-finite loss at epoch " + std::to_string(epoch) +
                             " step " + std::to_string(it + 1) + " (" + describe(step) + ")");
        }
      }
      const double inv = 1.0 / double(iters);
      log.critic_loss += step.critic_loss * inv;
      log.wasserstein += step.wasserstein * inv;
      log.adv += step.adv * inv;
      log.l_cs += step.l_cs * inv;
      log.l_sd += step.l_sd * inv;
      log.l_sp += step.l_sp * inv;
      log.total += step.total * inv;
    }
    out.log.push_back(log);
  }
  return out;
}

LabeledFeatures synthesize_unseen(const GeneratorParams& g,
                                  const std::map<ClassId, Tensor>& semantic_vectors,
                                  std::size_t count_per_class, std::uint64_t seed) {
  if (count_per_class < 1) throw ContractError("synthesize_unseen: count must be >= 1");
  if (semantic_vectors.empty()) throw ContractError("synthesize_unseen: no classes requested");
  Rng rng(derive_seed(seed, 6));
  LabeledFeatures out;
  for (const auto& [id, w] : semantic_vectors) {
    if (id == kBackground) throw ContractError("synthesize_unseen: background has no semantic vector");
    if (w.rows() != 1 || w.cols() >= g.w1.rows()) {
      throw DimensionError("synthesize_unseen: semantic vector of class " + std::to_string(id) +
                           " does not fit the generator");
    }
    const std::size_t dz = g.w1.rows() - w.cols();
    const Tensor f = generate(g, sample_normal(count_per_class, dz, rng), repeat_rows(w, count_per_class));
    out = concat(out, LabeledFeatures{f, std::vector<ClassId>(count_per_class, id)});
  }
  return out;
}

ClassifierParams train_unseen_classifier(const LabeledFeatures& synth, const TrainConfig& cfg,
                                         const ClassifierParams* seen,
                                         const LabeledFeatures* negatives) {
  if (synth.size() == 0 || !synth.has_labels()) {
    throw DataError("train_unseen_classifier: no synthesized features");
  }
  if (negatives && !seen) throw ContractError("train_unseen_classifier: negatives need the seen classifier");
  std::set<ClassId> ids(synth.labels.begin(), synth.labels.end());
  const LabeledFeatures data = negatives ? concat(synth, *negatives) : synth;
  return train_classifier(data, std::vector<ClassId>(ids.begin(), ids.end()), cfg,
                          derive_seed(cfg.seed, 5), seen);
}

ClassifierParams merge_classifiers(const ClassifierParams& seen, const ClassifierParams& unseen) {
  if (seen.weight.rows() != unseen.weight.rows()) {
    throw DimensionError("merge_classifiers: feature dimension " + std::to_string(seen.weight.rows()) +
                         " vs " + std::to_string(unseen.weight.rows()));
  }
  for (ClassId c : unseen.classes) {
    if (seen.column_of(c) >= 0) {
      throw ContractError("merge_classifiers: class " + std::to_string(c) + " appears in both classifiers");
    }
  }
  ClassifierParams out;
  out.weight = kernels::concat_cols(seen.weight, unseen.weight);
  out.bias = kernels::concat_cols(seen.bias, unseen.bias);
  out.classes = seen.classes;
  out.classes.insert(out.classes.end(), unseen.classes.begin(), unseen.classes.end());
  return out;
}

ClassifierParams select_classes(const ClassifierParams& c, std::span<const ClassId> classes) {
  if (classes.empty()) throw ContractError("select_classes: no classes");
  const std::size_t d = c.weight.rows();
  std::vector<Real> w(d * classes.size()), b(classes.size());
  for (std::size_t j = 0; j < classes.size(); ++j) {
    const auto col = c.column_of(classes[j]);
    if (col < 0) throw ContractError("select_classes: class " + std::to_string(classes[j]) + " not present");
    for (std::size_t i = 0; i < d; ++i) w[i * classes.size() + j] = c.weight(i, col);
    b[j] = c.bias[col];
  }
  ClassifierParams out;
  out.weight = Tensor(d, classes.size(), std::move(w));
  out.bias = Tensor(1, classes.size(), std::move(b));
  out.classes.assign(classes.begin(), classes.end());
  return out;
}

EvalReport evaluate(const ClassifierParams& merged, const Benchmark& bench, EvalMode mode) {
  EvalReport r;
  r.mode = mode;
  r.seen_classes = bench.seen_ids();
  r.unseen_classes = bench.unseen_ids();
  LabeledFeatures test;
  ClassifierParams c;
  if (mode == EvalMode::kZsd) {
    test = bench.unseen_test;
    std::vector<ClassId> cols;
    for (ClassId id : merged.classes) {
      if (std::find(r.unseen_classes.begin(), r.unseen_classes.end(), id) != r.unseen_classes.end()) {
        cols.push_back(id);
      }
    }
    if (cols.empty()) throw ContractError("evaluate: classifier has no unseen classes");
    if (merged.column_of(kBackground) >= 0) cols.push_back(kBackground);
    c = select_classes(merged, cols);
  } else {
    test = concat(bench.seen_test, bench.unseen_test);
    c = merged;
  }
  if (test.size() == 0) throw DataError("evaluate: empty test set");
  if (test.dim() != c.weight.rows()) throw DimensionError("evaluate: feature dimension mismatch");

  const auto pred = argmax_rows(classifier_logits(c, test.features));
  std::set<ClassId> present(test.labels.begin(), test.labels.end());
  r.true_classes.assign(present.begin(), present.end());
  r.predicted_classes = c.classes;
  r.confusion.assign(r.true_classes.size(), std::vector<std::size_t>(c.classes.size(), 0));
  std::map<ClassId, std::size_t> row_of;
  for (std::size_t i = 0; i < r.true_classes.size(); ++i) row_of[r.true_classes[i]] = i;
  std::map<ClassId, std::pair<std::size_t, std::size_t>> hits;  // correct, total
  for (std::size_t i = 0; i < test.size(); ++i) {
    const ClassId y = test.labels[i];
    ++r.confusion[row_of[y]][pred[i]];
    auto& h = hits[y];
    h.first += c.classes[pred[i]] == y;
    ++h.second;
  }
  for (const auto& [id, h] : hits) r.per_class_accuracy[id] = 100.0 * double(h.first) / double(h.second);

  auto mean_over = [&](const std::vector<ClassId>& ids) {
    double s = 0;
    std::size_t k = 0;
    for (ClassId id : ids) {
      auto it = r.per_class_accuracy.find(id);
      if (it == r.per_class_accuracy.end()) continue;
      s += it->second;
      ++k;
    }
    return k ? s / double(k) : 0.0;
  };
  r.unseen_accuracy = mean_over(r.unseen_classes);
  if (mode == EvalMode::kZsd) {
    r.zsd_accuracy = r.unseen_accuracy;
  } else {
    r.seen_accuracy = mean_over(r.seen_classes);
    r.harmonic_mean = harmonic_mean(r.seen_accuracy, r.unseen_accuracy);
  }
  return r;
}

// -- end to end -----------------------------------------------------------------

PipelineResult finish_pipeline(const Benchmark& bench, const TrainConfig& cfg, ClassifierParams seen,
                               SynthesizerResult synth) {
  PipelineResult out;
  std::map<ClassId, Tensor> unseen_vectors;
  for (const auto& c : bench.unseen) unseen_vectors.emplace(c.id, c.semantic);
  out.synthesized = synthesize_unseen(synth.generator, unseen_vectors, cfg.synth_per_class, cfg.seed);
  ClassifierParams unseen;
  switch (cfg.unseen_head) {
    case UnseenHead::kSeparate:
      unseen = train_unseen_classifier(out.synthesized, cfg);
      break;
    case UnseenHead::kJoint:
      unseen = train_unseen_classifier(out.synthesized, cfg, &seen);
      break;
    case UnseenHead::kJointWithReal: {
      const LabeledFeatures negatives = concat(bench.seen_train, bench.background);
      unseen = train_unseen_classifier(out.synthesized, cfg, &seen, &negatives);
      break;
    }
  }

  out.params.dims = model_dims(bench, cfg);
  out.params.seed = cfg.seed;
  out.params.generator = std::move(synth.generator);
  out.params.discriminator = std::move(synth.discriminator);
  out.params.merged_classifier = merge_classifiers(seen, unseen);
  out.params.seen_classifier = std::move(seen);
  out.params.unseen_classifier = std::move(unseen);
  out.log = std::move(synth.log);
  out.zsd = evaluate(out.params.merged_classifier, bench, EvalMode::kZsd);
  out.gzsd = evaluate(out.params.merged_classifier, bench, EvalMode::kGzsd);
  return out;
}

PipelineResult run_pipeline(const Benchmark& bench, const TrainConfig& cfg) {
  cfg.validate();
  ClassifierParams seen = pretrain_seen_classifier(bench, cfg);
  SynthesizerResult synth = train_synthesizer(bench, seen, cfg);
  return finish_pipeline(bench, cfg, std::move(seen), std::move(synth));
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "b";
    case Variant::kSd: return "b+Sd";
    case Variant::kSdSps: return "b+Sd+Sps";
    case Variant::kSdSp: return "b+Sd+Sp";
  }
  return "?";
}

Variant parse_variant(const std::string& text) {
  for (Variant v : all_variants()) {
    if (text == variant_name(v)) return v;
  }
  throw ConfigError("unknown ablation variant '" + text + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::kBaseline, Variant::kSd, Variant::kSdSps, Variant::kSdSp};
}

TrainConfig apply_variant(TrainConfig cfg, Variant v) {
  switch (v) {
    case Variant::kBaseline:
      cfg.weights.lambda_sd = 0;
      cfg.weights.lambda_sp = 0;
      break;
    case Variant::kSd:
      cfg.weights.lambda_sp = 0;
      break;
    case Variant::kSdSps:
      cfg.pool = PoolMode::kSynthOnly;
      break;
    case Variant::kSdSp:
      cfg.pool = PoolMode::kHybrid;
      break;
  }
  return cfg;
}

std::vector<AblationRow> run_ablation(const Benchmark& bench, const TrainConfig& cfg,
                                      std::span<const Variant> variants, std::size_t workers) {
  cfg.validate();
  const ClassifierParams seen = pretrain_seen_classifier(bench, cfg);
  std::vector<AblationRow> rows(variants.size());
  std::vector<std::exception_ptr> errors(variants.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < variants.size();) {
      try {
        const TrainConfig vc = apply_variant(cfg, variants[i]);
        PipelineResult r = finish_pipeline(bench, vc, seen, train_synthesizer(bench, seen, vc));
        rows[i] = AblationRow{variants[i], std::move(r.zsd), std::move(r.gzsd)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, variants.size()));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

// -- reports --------------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_training_log(const std::vector<EpochLog>& log, std::ostream& os) {
  os << "epoch,critic_loss,adv,l_cs,l_sd,l_sp,total\n";
  for (const auto& e : log) {
    os << e.epoch << ',' << num(e.critic_loss) << ',' << num(e.adv) << ',' << num(e.l_cs) << ','
       << num(e.l_sd) << ',' << num(e.l_sp) << ',' << num(e.total) << '\n';
  }
}

void write_report_csv(const EvalReport& r, std::ostream& os) {
  os << "section,name,value\n";
  os << "metric,mode," << mode_name(r.mode) << '\n';
  os << "metric,seen_accuracy," << num(r.seen_accuracy) << '\n';
  os << "metric,unseen_accuracy," << num(r.unseen_accuracy) << '\n';
  os << "metric,harmonic_mean," << num(r.harmonic_mean) << '\n';
  os << "metric,zsd_accuracy," << num(r.zsd_accuracy) << '\n';
  for (const auto& [id, acc] : r.per_class_accuracy) os << "class," << id << ',' << num(acc) << '\n';
  for (std::size_t i = 0; i < r.true_classes.size(); ++i) {
    for (std::size_t j = 0; j < r.predicted_classes.size(); ++j) {
      os << "confusion," << r.true_classes[i] << "->" << r.predicted_classes[j] << ','
         << r.confusion[i][j] << '\n';
    }
  }
}

void write_summary(const EvalReport& r, std::ostream& os) {
  auto label = [](ClassId id) { return id == kBackground ? std::string("bg") : std::to_string(id); };
  os << "mode: " << mode_name(r.mode) << '\n';
  if (r.mode == EvalMode::kZsd) {
    os << "unseen accuracy (ZSD): " << pct(r.zsd_accuracy) << "%\n";
  } else {
    os << "seen accuracy S:   " << pct(r.seen_accuracy) << "%\n";
    os << "unseen accuracy U: " << pct(r.unseen_accuracy) << "%\n";
    os << "harmonic mean HM:  " << pct(r.harmonic_mean) << "%\n";
  }
  os << "per-class accuracy:\n";
  for (const auto& [id, acc] : r.per_class_accuracy) {
    const bool unseen = std::find(r.unseen_classes.begin(), r.unseen_classes.end(), id) != r.unseen_classes.end();
    os << "  class " << id << (unseen ? " (unseen)" : " (seen)") << ": " << pct(acc) << "%\n";
  }
  os << "confusion (rows true, columns predicted):\n     ";
  for (ClassId c : r.predicted_classes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6s", label(c).c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i < r.true_classes.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%5s", label(r.true_classes[i]).c_str());
    os << buf;
    for (std::size_t v : r.confusion[i]) {
      std::snprintf(buf, sizeof buf, "%6zu", v);
      os << buf;
    }
    os << '\n';
  }
}

void write_ablation_table(const std::vector<AblationRow>& rows, std::ostream& os) {
  os << "variant,zsd_unseen,gzsd_seen,gzsd_unseen,gzsd_hm\n";
  for (const auto& r : rows) {
    os << variant_name(r.variant) << ',' << pct(r.zsd.zsd_accuracy) << ',' << pct(r.gzsd.seen_accuracy)
       << ',' << pct(r.gzsd.unseen_accuracy) << ',' << pct(r.gzsd.harmonic_mean) << '\n';
  }
}

}  // namespace rfs
