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

#include "rfs/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "rfs/config.hpp"
#include "rfs/errors.hpp"

namespace rfs {

// -- LabeledFeatures helpers --------------------------------------------------

Tensor gather_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return {};
  std::vector<Real> out;
  out.reserve(rows.size() * t.cols());
  for (std::size_t r : rows) {
    if (r >= t.rows()) throw DimensionError("gather_rows: row index out of range");
    auto s = t.row_span(r);
    out.insert(out.end(), s.begin(), s.end());
  }
  return Tensor(rows.size(), t.cols(), std::move(out));
}

LabeledFeatures gather(const LabeledFeatures& f, const std::vector<std::size_t>& rows) {
  LabeledFeatures out;
  out.features = gather_rows(f.features, rows);
  if (f.has_labels()) {
    for (std::size_t r : rows) out.labels.push_back(f.labels[r]);
  }
  return out;
}

LabeledFeatures concat(const LabeledFeatures& a, const LabeledFeatures& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.has_labels() != b.has_labels()) throw ContractError("concat: mixed labeled/unlabeled batches");
  LabeledFeatures out;
  out.features = kernels::concat_rows(a.features, b.features);
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

// -- BenchmarkConfig / Benchmark ----------------------------------------------

void BenchmarkConfig::validate() const {
  if (num_seen < 2) throw ConfigError("data.num_seen must be >= 2");
  if (num_unseen < 1) throw ConfigError("data.num_unseen must be >= 1");
  if (d_f < 2 || d_w < 2) throw ConfigError("data.d_f and data.d_w must be >= 2");
  if (samples_per_class_train < 1 || samples_per_class_test < 1) {
    throw ConfigError("per-class sample counts must be >= 1");
  }
  if (!(cov_scale > 0)) throw ConfigError("data.cov_scale must be > 0");
  if (latent_dim < 1) throw ConfigError("data.latent_dim must be >= 1");
  if (background_count < 1) throw ConfigError("data.background_count must be >= 1");
}

std::vector<ClassId> Benchmark::seen_ids() const {
  std::vector<ClassId> out;
  for (const auto& c : seen) out.push_back(c.id);
  return out;
}

std::vector<ClassId> Benchmark::unseen_ids() const {
  std::vector<ClassId> out;
  for (const auto& c : unseen) out.push_back(c.id);
  return out;
}

std::size_t Benchmark::feature_dim() const { return seen_train.dim(); }

std::size_t Benchmark::semantic_dim() const {
  return seen.empty() ? 0 : seen.front().semantic.cols();
}

const Tensor& Benchmark::semantic_of(ClassId id) const {
  for (const auto* group : {&seen, &unseen}) {
    for (const auto& c : *group) {
      if (c.id == id) return c.semantic;
    }
  }
  throw ContractError("unknown class id " + std::to_string(id));
}

std::map<ClassId, Tensor> Benchmark::semantic_vectors() const {
  std::map<ClassId, Tensor> out;
  for (const auto& c : seen) out.emplace(c.id, c.semantic);
  for (const auto& c : unseen) out.emplace(c.id, c.semantic);
  return out;
}

void Benchmark::validate() const {
  if (seen.size() < 2) throw DataError("benchmark needs at least two seen classes");
  if (unseen.empty()) throw DataError("benchmark needs at least one unseen class");
  std::set<ClassId> seen_set, unseen_set;
  for (const auto& c : seen) {
    if (c.id == kBackground) throw DataError("class id -1 is reserved for background");
    if (!seen_set.insert(c.id).second) throw DataError("duplicate seen class id " + std::to_string(c.id));
  }
  for (const auto& c : unseen) {
    if (c.id == kBackground) throw DataError("class id -1 is reserved for background");
    if (!unseen_set.insert(c.id).second) throw DataError("duplicate unseen class id " + std::to_string(c.id));
    if (seen_set.count(c.id)) throw DataError("class " + std::to_string(c.id) + " is both seen and unseen");
  }
  const std::size_t dw = semantic_dim();
  for (const auto* group : {&seen, &unseen}) {
    for (const auto& c : *group) {
      if (c.semantic.rows() != 1 || c.semantic.cols() != dw) {
        throw DataError("semantic vector of class " + std::to_string(c.id) + " has wrong shape");
      }
    }
  }
  if (seen_train.size() == 0) throw DataError("benchmark has no seen training features");
  const std::size_t df = seen_train.dim();

  auto check = [&](const LabeledFeatures& f, const char* name, const std::set<ClassId>& allowed,
                   bool allow_background) {
    if (f.size() == 0) return;
    if (f.dim() != df) throw DataError(std::string(name) + ": feature dimension mismatch");
    if (f.labels.size() != f.size()) throw DataError(std::string(name) + ": missing labels");
    for (ClassId y : f.labels) {
      if (y == kBackground ? !allow_background : !allowed.count(y)) {
        throw DataError(std::string(name) + ": unexpected label " + std::to_string(y));
      }
    }
    for (Real v : f.features.values()) {
      if (!(v >= 0) || !std::isfinite(v)) throw DataError(std::string(name) + ": negative or non-finite feature");
    }
  };
  std::set<ClassId> none;
  check(seen_train, "seen_train", seen_set, false);
  check(proposals, "proposals", seen_set, false);
  check(background, "background", none, true);
  check(seen_test, "seen_test", seen_set, false);
  check(unseen_test, "unseen_test", unseen_set, false);
}

namespace {

Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<Real> v(rows * cols);
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return Tensor(rows, cols, std::move(v));
}

// Coordinates drawn from N(mean_k, sigma^2) conditioned on being >= 0.
LabeledFeatures sample_class(const ClassSpec& c, std::size_t n, Rng& rng) {
  std::normal_distribution<double> noise(0.0, c.cov_scale);
  const std::size_t d = c.mean.cols();
  std::vector<Real> v(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double x;
      do {
        x = c.mean[k] + noise(rng);
      } while (x < 0);
      v[i * d + k] = static_cast<Real>(x);
    }
  }
  return {Tensor(n, d, std::move(v)), std::vector<ClassId>(n, c.id)};
}

constexpr double kMeanBase = 1.5;
constexpr double kMeanSpread = 0.6;
constexpr double kSemanticNoise = 0.05;
constexpr double kBackgroundStd = 0.1;
constexpr double kJitterFraction = 0.2;

}  // namespace

Benchmark generate_benchmark(BenchmarkConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return generate_benchmark(cfg);
}

Benchmark generate_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 11));
  const std::size_t k = cfg.latent_dim;
  const std::size_t total = cfg.num_seen + cfg.num_unseen;

  // Shared linear maps: latent class factors -> semantic vector, -> feature mean.
  const Tensor to_semantic = normal_tensor(k, cfg.d_w, 1.0 / std::sqrt(double(k)), rng);
  const Tensor to_mean = normal_tensor(k, cfg.d_f, kMeanSpread / std::sqrt(double(k)), rng);

  Benchmark b;
  b.config = cfg;
  for (std::size_t c = 0; c < total; ++c) {
    const Tensor u = normal_tensor(1, k, 1.0, rng);
    const Tensor w = kernels::add(kernels::matmul(u, to_semantic),
                                  normal_tensor(1, cfg.d_w, kSemanticNoise, rng));
    const Tensor shift = kernels::matmul(u, to_mean);
    std::vector<Real> mean(cfg.d_f);
    for (std::size_t j = 0; j < cfg.d_f; ++j) {
      mean[j] = static_cast<Real>(std::max(0.0, kMeanBase + static_cast<double>(shift[j])));
    }
    ClassSpec spec;
    spec.id = static_cast<ClassId>(c);
    spec.semantic = w;
    spec.mean = Tensor::row(std::move(mean));
    spec.cov_scale = cfg.cov_scale;
    spec.n_train = c < cfg.num_seen ? cfg.samples_per_class_train : 0;
    spec.n_test = cfg.samples_per_class_test;
    (c < cfg.num_seen ? b.seen : b.unseen).push_back(std::move(spec));
  }

  Rng feature_rng(derive_seed(cfg.seed, 12));
  for (const auto& c : b.seen) {
    b.seen_train = concat(b.seen_train, sample_class(c, c.n_train, feature_rng));
  }
  for (const auto& c : b.seen) {
    b.seen_test = concat(b.seen_test, sample_class(c, c.n_test, feature_rng));
  }
  for (const auto& c : b.unseen) {
    b.unseen_test = concat(b.unseen_test, sample_class(c, c.n_test, feature_rng));
  }

  // Proposals: every training feature shifted by |N(0, (0.2 sigma)^2)| per coordinate.
  Rng jitter_rng(derive_seed(cfg.seed, 13));
  std::normal_distribution<double> jitter(0.0, kJitterFraction * cfg.cov_scale);
  {
    std::vector<Real> v = b.seen_train.features.to_vector();
    for (Real& x : v) x = static_cast<Real>(x + std::abs(jitter(jitter_rng)));
    b.proposals.features = Tensor(b.seen_train.size(), cfg.d_f, std::move(v));
    b.proposals.labels = b.seen_train.labels;
  }

  Rng bg_rng(derive_seed(cfg.seed, 14));
  std::normal_distribution<double> bg(0.0, kBackgroundStd);
  {
    std::vector<Real> v(cfg.background_count * cfg.d_f);
    for (Real& x : v) x = static_cast<Real>(std::abs(bg(bg_rng)));
    b.background.features = Tensor(cfg.background_count, cfg.d_f, std::move(v));
    b.background.labels.assign(cfg.background_count, kBackground);
  }
  b.validate();
  return b;
}

// -- feature files ------------------------------------------------------------

namespace {

constexpr char kFeatureMagic[4] = {'R', 'F', 'S', 'F'};
constexpr std::uint64_t kMaxRows = 1ull << 32;
constexpr std::uint32_t kMaxDim = 1u << 20;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw DataError(where + ": cannot parse number '" + s + "'");
  }
  return v;
}

ClassId parse_class(const std::string& s, const std::string& where) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError(where + ": cannot parse class id '" + s + "'");
  }
  return static_cast<ClassId>(v);
}

bool looks_numeric(const std::string& s) {
  double v;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

LabeledFeatures load_binary(std::istream& is, const std::string& name) {
  const auto version = detail::get_le<std::uint32_t>(is, "version");
  if (version != kFeatureFileVersion) {
    throw DataError(name + ": unknown feature file version " + std::to_string(version));
  }
  const auto count = detail::get_le<std::uint64_t>(is, "count");
  const auto dim = detail::get_le<std::uint32_t>(is, "dim");
  const auto flags = detail::get_le<std::uint32_t>(is, "flags");
  if (count > kMaxRows || dim == 0 || dim > kMaxDim || (flags & ~1u) != 0) {
    throw DataError(name + ": malformed feature header");
  }
  LabeledFeatures out;
  if (count == 0) return out;
  std::vector<Real> v(count * dim);
  std::vector<char> raw(v.size() * 8);
  if (!is.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
    throw DataError(name + ": truncated feature data");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i * 8 + b])) << (8 * b);
    }
    v[i] = static_cast<Real>(std::bit_cast<double>(bits));
  }
  out.features = Tensor(count, dim, std::move(v));
  if (flags & 1u) {
    out.labels.resize(count);
    for (auto& y : out.labels) {
      y = static_cast<ClassId>(detail::get_le<std::uint32_t>(is, "labels"));
    }
  }
  return out;
}

LabeledFeatures load_csv(std::istream& is, const std::string& name) {
  std::string line;
  if (!std::getline(is, line)) throw DataError(name + ": empty feature file");
  const auto header = split_csv(line);
  if (header.empty()) throw DataError(name + ": malformed CSV header");
  const bool labeled = header.front() == "label";
  const std::size_t dim = header.size() - (labeled ? 1 : 0);
  if (dim == 0) throw DataError(name + ": CSV header declares no feature columns");

  LabeledFeatures out;
  std::vector<Real> v;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    std::size_t c = 0;
    if (labeled) out.labels.push_back(parse_class(cells[c++], where));
    for (; c < cells.size(); ++c) v.push_back(static_cast<Real>(parse_double(cells[c], where)));
    ++rows;
  }
  if (rows > 0) out.features = Tensor(rows, dim, std::move(v));
  return out;
}

}  // namespace

void save_features(const LabeledFeatures& batch, const std::filesystem::path& path,
                   FeatureFormat format) {
  if (batch.has_labels() && batch.labels.size() != batch.size()) {
    throw ContractError("save_features: label count does not match rows");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  const std::size_t n = batch.size();
  const std::size_t d = batch.dim();
  if (format == FeatureFormat::kBinary) {
    os.write(kFeatureMagic, 4);
    detail::put_le<std::uint32_t>(os, kFeatureFileVersion);
    detail::put_le<std::uint64_t>(os, n);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d == 0 ? 1 : d));
    detail::put_le<std::uint32_t>(os, batch.has_labels() ? 1u : 0u);
    std::vector<char> raw(n * d * 8);
    auto v = batch.features.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(static_cast<double>(v[i]));
      for (int b = 0; b < 8; ++b) raw[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    for (ClassId y : batch.labels) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(y));
  } else {
    if (batch.has_labels()) os << "label";
    for (std::size_t j = 0; j < std::max<std::size_t>(d, 1); ++j) {
      os << ((j == 0 && !batch.has_labels()) ? "" : ",") << 'f' << j;
    }
    os << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      if (batch.has_labels()) os << batch.labels[i];
      for (std::size_t j = 0; j < d; ++j) {
        os << ((j == 0 && !batch.has_labels()) ? "" : ",") << format_real(batch.features(i, j));
      }
      os << '\n';
    }
  }
  if (!os) throw DataError("failed writing " + path.string());
}

LabeledFeatures load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open feature file: " + path.string());
  char magic[4] = {0, 0, 0, 0};
  is.read(magic, 4);
  const bool binary = is.gcount() == 4 && std::equal(magic, magic + 4, kFeatureMagic);
  if (binary) return load_binary(is, path.string());
  is.clear();
  is.seekg(0);
  return load_csv(is, path.string());
}

void save_semantic_vectors(const std::map<ClassId, Tensor>& vectors,
                           const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  const std::size_t d = vectors.empty() ? 0 : vectors.begin()->second.size();
  os << "id";
  for (std::size_t j = 0; j < d; ++j) os << ",w" << j;
  os << '\n';
  for (const auto& [id, w] : vectors) {
    os << id;
    for (Real x : w.values()) os << ',' << format_real(x);
    os << '\n';
  }
  if (!os) throw DataError("failed writing " + path.string());
}

std::map<ClassId, Tensor> load_semantic_vectors(const std::filesystem::path& path,
                                                bool l2_normalize) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open semantic vector file: " + path.string());
  std::map<ClassId, Tensor> out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (lineno == 1 && !looks_numeric(cells.front())) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() < 2) throw DataError(where + ": expected an id and at least one value");
    const ClassId id = parse_class(cells[0], where);
    if (dim == 0) dim = cells.size() - 1;
    if (cells.size() - 1 != dim) {
      throw DataError(where + ": inconsistent dimension (" + std::to_string(cells.size() - 1) +
                      " vs " + std::to_string(dim) + ")");
    }
    std::vector<Real> v;
    for (std::size_t c = 1; c < cells.size(); ++c) v.push_back(static_cast<Real>(parse_double(cells[c], where)));
    if (l2_normalize) {
      double n2 = 0;
      for (Real x : v) n2 += double(x) * double(x);
      if (n2 == 0) throw DataError(where + ": cannot normalize a zero vector");
      const double n = std::sqrt(n2);
      for (Real& x : v) x = static_cast<Real>(x / n);
    }
    if (!out.emplace(id, Tensor::row(std::move(v))).second) {
      throw DataError(where + ": duplicate class id " + std::to_string(id));
    }
  }
  return out;
}

void save_split(const Benchmark& bench, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  os << "id,role\n";
  for (const auto& c : bench.seen) os << c.id << ",seen\n";
  for (const auto& c : bench.unseen) os << c.id << ",unseen\n";
}

std::vector<std::string> save_benchmark(const Benchmark& bench, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

  std::vector<std::pair<std::string, std::string>> files;  // name, description
  {
    std::ofstream os(dir / "benchmark.cfg", std::ios::trunc);
    if (!os) throw DataError("cannot write " + (dir / "benchmark.cfg").string());
    os << format_benchmark_config(bench.config);
    files.emplace_back("benchmark.cfg", "config");
  }
  save_semantic_vectors(bench.semantic_vectors(), dir / "semantic.csv");
  files.emplace_back("semantic.csv", "semantic");
  save_split(bench, dir / "split.csv");
  files.emplace_back("split.csv", "split");
  const std::pair<const char*, const LabeledFeatures*> sets[] = {
      {"seen_train.rfsf", &bench.seen_train}, {"proposals.rfsf", &bench.proposals},
      {"background.rfsf", &bench.background}, {"seen_test.rfsf", &bench.seen_test},
      {"unseen_test.rfsf", &bench.unseen_test}};
  for (const auto& [name, f] : sets) {
    save_features(*f, dir / name);
    files.emplace_back(name, "features rows=" + std::to_string(f->size()));
  }

  std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
  if (!manifest) throw DataError("cannot write manifest in " + dir.string());
  std::vector<std::string> names;
  for (const auto& [name, desc] : files) {
    manifest << name << '\t' << desc << '\n';
    names.push_back(name);
  }
  names.push_back("manifest.txt");
  return names;
}

Benchmark load_benchmark(const std::filesystem::path& dir) {
  Benchmark b;
  if (std::filesystem::exists(dir / "benchmark.cfg")) {
    b.config = load_benchmark_config(dir / "benchmark.cfg");
  }
  const auto semantic = load_semantic_vectors(dir / "semantic.csv");

  std::ifstream split(dir / "split.csv");
  if (!split) throw DataError("missing split file: " + (dir / "split.csv").string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(split, line)) {
    ++lineno;
    const auto cells = split_csv(line);
    if (cells.empty() || cells[0].empty()) continue;
    if (lineno == 1 && !looks_numeric(cells[0])) continue;
    const std::string where = (dir / "split.csv").string() + ":" + std::to_string(lineno);
    if (cells.size() != 2) throw DataError(where + ": expected 'id,role'");
    ClassSpec spec;
    spec.id = parse_class(cells[0], where);
    auto it = semantic.find(spec.id);
    if (it == semantic.end()) throw DataError(where + ": no semantic vector for class " + cells[0]);
    spec.semantic = it->second;
    spec.cov_scale = b.config.cov_scale;
    if (cells[1] == "seen") {
      b.seen.push_back(spec);
    } else if (cells[1] == "unseen") {
      b.unseen.push_back(spec);
    } else {
      throw DataError(where + ": role must be 'seen' or 'unseen'");
    }
  }
  b.seen_train = load_features(dir / "seen_train.rfsf");
  b.proposals = load_features(dir / "proposals.rfsf");
  b.background = load_features(dir / "background.rfsf");
  b.seen_test = load_features(dir / "seen_test.rfsf");
  b.unseen_test = load_features(dir / "unseen_test.rfsf");
  for (auto* group : {&b.seen, &b.unseen}) {
    for (auto& c : *group) {
      c.n_train = static_cast<std::size_t>(
          std::count(b.seen_train.labels.begin(), b.seen_train.labels.end(), c.id));
      c.n_test = static_cast<std::size_t>(
          std::count(b.seen_test.labels.begin(), b.seen_test.labels.end(), c.id) +
          std::count(b.unseen_test.labels.begin(), b.unseen_test.labels.end(), c.id));
    }
  }
  b.validate();
  return b;
}

}  // namespace rfs
