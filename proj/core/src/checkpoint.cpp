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

#include "rfs/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <utility>

#include "binary_io.hpp"
#include "rfs/errors.hpp"

namespace rfs {
namespace {

constexpr char kMagic[4] = {'R', 'F', 'S', 'C'};
constexpr std::uint64_t kMaxDim = 1ull << 24;

using Named = std::vector<std::pair<std::string, Tensor>>;

Tensor classes_tensor(const std::vector<ClassId>& classes) {
  std::vector<Real> v(classes.begin(), classes.end());
  const std::size_t n = v.size();
  return Tensor(1, n, std::move(v));
}

void add_classifier(Named& out, const std::string& prefix, const ClassifierParams& c) {
  if (c.classes.empty()) return;
  out.emplace_back(prefix + ".weight", c.weight);
  out.emplace_back(prefix + ".bias", c.bias);
  out.emplace_back(prefix + ".classes", classes_tensor(c.classes));
}

void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  detail::put_le<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  detail::put_le<std::uint64_t>(os, t.rows());
  detail::put_le<std::uint64_t>(os, t.cols());
  for (Real v : t.values()) detail::put_f64(os, static_cast<double>(v));
}

ClassifierParams take_classifier(std::map<std::string, Tensor>& arrays, const std::string& prefix) {
  ClassifierParams c;
  auto w = arrays.find(prefix + ".weight");
  if (w == arrays.end()) return c;
  auto b = arrays.find(prefix + ".bias");
  auto k = arrays.find(prefix + ".classes");
  if (b == arrays.end() || k == arrays.end()) {
    throw DataError("checkpoint: incomplete classifier '" + prefix + "'");
  }
  c.weight = w->second;
  c.bias = b->second;
  for (Real v : k->second.values()) c.classes.push_back(static_cast<ClassId>(std::lround(v)));
  if (c.weight.cols() != c.classes.size() || c.bias.cols() != c.classes.size()) {
    throw DataError("checkpoint: classifier '" + prefix + "' has inconsistent class count");
  }
  return c;
}

Tensor take(std::map<std::string, Tensor>& arrays, const std::string& name, std::size_t rows,
            std::size_t cols) {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw DataError("checkpoint: missing array '" + name + "'");
  if (it->second.rows() != rows || it->second.cols() != cols) {
    throw DataError("checkpoint: array '" + name + "' is " + it->second.shape_string() +
                    ", header implies " + shape_string(rows, cols));
  }
  return it->second;
}

}  // namespace

void save_checkpoint(const ModelParams& p, const std::filesystem::path& path) {
  Named arrays = {
      {"generator.w1", p.generator.w1},         {"generator.b1", p.generator.b1},
      {"generator.w2", p.generator.w2},         {"generator.b2", p.generator.b2},
      {"discriminator.w1", p.discriminator.w1}, {"discriminator.b1", p.discriminator.b1},
      {"discriminator.w2", p.discriminator.w2}, {"discriminator.b2", p.discriminator.b2},
  };
  add_classifier(arrays, "seen", p.seen_classifier);
  add_classifier(arrays, "unseen", p.unseen_classifier);
  add_classifier(arrays, "merged", p.merged_classifier);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, 4);
  detail::put_le<std::uint32_t>(os, kCheckpointVersion);
  detail::put_le<std::uint64_t>(os, p.dims.noise_dim);
  detail::put_le<std::uint64_t>(os, p.dims.semantic_dim);
  detail::put_le<std::uint64_t>(os, p.dims.feature_dim);
  detail::put_le<std::uint64_t>(os, p.dims.hidden_dim);
  detail::put_le<std::uint64_t>(os, p.seed);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& [name, t] : arrays) write_tensor(os, name, t);
  if (!os) throw DataError("failed writing checkpoint: " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw DataError("not a checkpoint file (bad magic): " + path.string());
  }
  const auto version = detail::get_le<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelParams p;
  p.dims.noise_dim = detail::get_le<std::uint64_t>(is, "noise_dim");
  p.dims.semantic_dim = detail::get_le<std::uint64_t>(is, "semantic_dim");
  p.dims.feature_dim = detail::get_le<std::uint64_t>(is, "feature_dim");
  p.dims.hidden_dim = detail::get_le<std::uint64_t>(is, "hidden_dim");
  p.seed = detail::get_le<std::uint64_t>(is, "seed");
  for (std::uint64_t d : {p.dims.noise_dim, p.dims.semantic_dim, p.dims.feature_dim,
                          p.dims.hidden_dim}) {
    if (d == 0 || d > kMaxDim) throw DataError("checkpoint: implausible dimension in header");
  }

  const auto count = detail::get_le<std::uint32_t>(is, "array count");
  std::map<std::string, Tensor> arrays;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = detail::get_le<std::uint16_t>(is, "array name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw DataError("truncated checkpoint (array name)");
    const auto rows = detail::get_le<std::uint64_t>(is, name + " rows");
    const auto cols = detail::get_le<std::uint64_t>(is, name + " cols");
    if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
      throw DataError("checkpoint: bad shape for array '" + name + "'");
    }
    std::vector<Real> v(rows * cols);
    for (Real& x : v) x = static_cast<Real>(detail::get_f64(is, name));
    arrays.emplace(name, Tensor(rows, cols, std::move(v)));
  }

  const auto& d = p.dims;
  p.generator.w1 = take(arrays, "generator.w1", d.noise_dim + d.semantic_dim, d.hidden_dim);
  p.generator.b1 = take(arrays, "generator.b1", 1, d.hidden_dim);
  p.generator.w2 = take(arrays, "generator.w2", d.hidden_dim, d.feature_dim);
  p.generator.b2 = take(arrays, "generator.b2", 1, d.feature_dim);
  p.discriminator.w1 = take(arrays, "discriminator.w1", d.feature_dim + d.semantic_dim, d.hidden_dim);
  p.discriminator.b1 = take(arrays, "discriminator.b1", 1, d.hidden_dim);
  p.discriminator.w2 = take(arrays, "discriminator.w2", d.hidden_dim, 1);
  p.discriminator.b2 = take(arrays, "discriminator.b2", 1, 1);
  p.seen_classifier = take_classifier(arrays, "seen");
  p.unseen_classifier = take_classifier(arrays, "unseen");
  p.merged_classifier = take_classifier(arrays, "merged");
  return p;
}

}  // namespace rfs
