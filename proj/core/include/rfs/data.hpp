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

// Desk-scale seen/unseen region-feature benchmarks and the file formats used
// to exchange them.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rfs/features.hpp"
#include "rfs/types.hpp"

namespace rfs {

struct BenchmarkConfig {
  std::size_t num_seen = 8;
  std::size_t num_unseen = 3;
  std::size_t d_f = 32;
  std::size_t d_w = 16;
  std::size_t samples_per_class_train = 200;
  std::size_t samples_per_class_test = 100;
  double cov_scale = 0.2;
  std::uint64_t seed = 1;
  // Dimension of the hidden class factors that drive both w and the feature mean.
  std::size_t latent_dim = 4;
  std::size_t background_count = 400;

  void validate() const;
};

struct ClassSpec {
  ClassId id = 0;
  Tensor semantic;  // 1 x D_w
  Tensor mean;      // 1 x D_f, non-negative; empty when loaded from files
  double cov_scale = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

struct Benchmark {
  BenchmarkConfig config;
  std::vector<ClassSpec> seen;
  std::vector<ClassSpec> unseen;
  LabeledFeatures seen_train;  // F^s with labels Y^s
  LabeledFeatures proposals;   // jittered foreground proposals, seen classes only
  LabeledFeatures background;  // labeled kBackground
  LabeledFeatures seen_test;
  LabeledFeatures unseen_test;

  std::vector<ClassId> seen_ids() const;
  std::vector<ClassId> unseen_ids() const;
  std::size_t feature_dim() const;
  std::size_t semantic_dim() const;
  /// Semantic vector of any seen or unseen class. Throws ContractError if unknown.
  const Tensor& semantic_of(ClassId id) const;
  std::map<ClassId, Tensor> semantic_vectors() const;

  /// Disjoint splits, no unseen labels on the training side, non-negative
  /// features, consistent dimensions. Throws DataError on violation.
  void validate() const;
};

Benchmark generate_benchmark(const BenchmarkConfig& cfg);
Benchmark generate_benchmark(BenchmarkConfig cfg, std::uint64_t seed);

// -- feature files ------------------------------------------------------------

inline constexpr std::uint32_t kFeatureFileVersion = 1;

enum class FeatureFormat { kBinary, kCsv };

/// Binary: "RFSF", u32 version, u64 count, u32 dim, u32 flags (bit 0: labels),
/// count*dim little-endian f64, then count little-endian i32 labels.
/// CSV: header "label,f0,..." (or "f0,..." when unlabeled), values printed with
/// 17 significant digits.
void save_features(const LabeledFeatures& batch, const std::filesystem::path& path,
                   FeatureFormat format = FeatureFormat::kBinary);
/// Detects the format from the file contents.
LabeledFeatures load_features(const std::filesystem::path& path);

/// CSV lines "id,w0,w1,...". A non-numeric first line is treated as a header.
void save_semantic_vectors(const std::map<ClassId, Tensor>& vectors,
                           const std::filesystem::path& path);
std::map<ClassId, Tensor> load_semantic_vectors(const std::filesystem::path& path,
                                                bool l2_normalize = false);

/// Lines "id,seen" / "id,unseen".
void save_split(const Benchmark& bench, const std::filesystem::path& path);

/// Writes every benchmark file plus manifest.txt into dir; returns the emitted
/// file names in manifest order.
std::vector<std::string> save_benchmark(const Benchmark& bench, const std::filesystem::path& dir);
Benchmark load_benchmark(const std::filesystem::path& dir);

}  // namespace rfs
