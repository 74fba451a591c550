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

#include "rfs/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "rfs/errors.hpp"

namespace rfs {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + v + "' (expected a number)");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError("invalid value for " + key + ": '" + v + "' (expected a non-negative integer)");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define RFS_SIZE_FIELD(member)                                                              \
  Field {                                                                                   \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) {                   \
      c.member = to_size(k, v);                                                             \
    },                                                                                      \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                  \
  }
#define RFS_REAL_FIELD(member)                                                              \
  Field {                                                                                   \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) {                   \
      c.member = to_double(k, v);                                                           \
    },                                                                                      \
        [](const ExperimentConfig& c) { return fmt(c.member); }                             \
  }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"data.num_seen", RFS_SIZE_FIELD(data.num_seen)},
      {"data.num_unseen", RFS_SIZE_FIELD(data.num_unseen)},
      {"data.d_f", RFS_SIZE_FIELD(data.d_f)},
      {"data.d_w", RFS_SIZE_FIELD(data.d_w)},
      {"data.samples_per_class_train", RFS_SIZE_FIELD(data.samples_per_class_train)},
      {"data.samples_per_class_test", RFS_SIZE_FIELD(data.samples_per_class_test)},
      {"data.cov_scale", RFS_REAL_FIELD(data.cov_scale)},
      {"data.seed", RFS_SIZE_FIELD(data.seed)},
      {"data.latent_dim", RFS_SIZE_FIELD(data.latent_dim)},
      {"data.background_count", RFS_SIZE_FIELD(data.background_count)},

      {"train.epochs", RFS_SIZE_FIELD(train.epochs)},
      {"train.batch_size", RFS_SIZE_FIELD(train.batch_size)},
      {"train.critic_steps", RFS_SIZE_FIELD(train.critic_steps)},
      {"train.lr", RFS_REAL_FIELD(train.adam.learning_rate)},
      {"train.beta1", RFS_REAL_FIELD(train.adam.beta1)},
      {"train.beta2", RFS_REAL_FIELD(train.adam.beta2)},
      {"train.hidden_dim", RFS_SIZE_FIELD(train.hidden_dim)},
      {"train.synth_per_class", RFS_SIZE_FIELD(train.synth_per_class)},
      {"train.unseen_head",
       Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
               if (v == "separate") {
                 c.train.unseen_head = UnseenHead::kSeparate;
               } else if (v == "joint") {
                 c.train.unseen_head = UnseenHead::kJoint;
               } else if (v == "joint_real") {
                 c.train.unseen_head = UnseenHead::kJointWithReal;
               } else {
                 throw ConfigError("invalid value for " + k + ": '" + v +
                                   "' (separate|joint|joint_real)");
               }
             },
             [](const ExperimentConfig& c) {
               switch (c.train.unseen_head) {
                 case UnseenHead::kSeparate: return std::string("separate");
                 case UnseenHead::kJoint: return std::string("joint");
                 case UnseenHead::kJointWithReal: break;
               }
               return std::string("joint_real");
             }}},
      {"train.classifier_epochs", RFS_SIZE_FIELD(train.classifier_epochs)},
      {"train.classifier_batch_size", RFS_SIZE_FIELD(train.classifier_batch_size)},
      {"train.classifier_lr", RFS_REAL_FIELD(train.classifier_lr)},
      {"train.classifier_patience", RFS_SIZE_FIELD(train.classifier_patience)},
      {"train.seed", RFS_SIZE_FIELD(train.seed)},

      {"loss.gp_lambda", RFS_REAL_FIELD(train.weights.gp_lambda)},
      {"loss.lambda_cls", RFS_REAL_FIELD(train.weights.lambda_cls)},
      {"loss.lambda_sd", RFS_REAL_FIELD(train.weights.lambda_sd)},
      {"loss.lambda_sp", RFS_REAL_FIELD(train.weights.lambda_sp)},
      {"loss.temperature", RFS_REAL_FIELD(train.weights.temperature)},
      {"loss.pool",
       Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
               if (v == "hybrid") {
                 c.train.pool = PoolMode::kHybrid;
               } else if (v == "synth") {
                 c.train.pool = PoolMode::kSynthOnly;
               } else {
                 throw ConfigError("invalid value for " + k + ": '" + v + "' (hybrid|synth)");
               }
             },
             [](const ExperimentConfig& c) {
               return std::string(c.train.pool == PoolMode::kHybrid ? "hybrid" : "synth");
             }}},
      {"loss.positive_policy",
       Field{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
               if (v == "prefer_real") {
                 c.train.positive_policy = PositivePolicy::kPreferRealProposal;
               } else if (v == "uniform") {
                 c.train.positive_policy = PositivePolicy::kUniformSameClass;
               } else {
                 throw ConfigError("invalid value for " + k + ": '" + v +
                                   "' (prefer_real|uniform)");
               }
             },
             [](const ExperimentConfig& c) {
               return std::string(c.train.positive_policy == PositivePolicy::kPreferRealProposal
                                      ? "prefer_real"
                                      : "uniform");
             }}},

      {"sample.radius", RFS_REAL_FIELD(train.noise.radius)},
      {"sample.negatives", RFS_SIZE_FIELD(train.noise.negatives)},
      {"sample.noise_dim", RFS_SIZE_FIELD(train.noise.noise_dim)},
  };
  return table;
}

#undef RFS_SIZE_FIELD
#undef RFS_REAL_FIELD

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& source) {
  std::vector<KeyValue> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValue parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(text) + "' is not of the form key=value");
  }
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError("override '" + std::string(text) + "' has an empty key");
  return {std::move(key), trim(text.substr(eq + 1))};
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key: " + key);
}

void apply_benchmark_setting(BenchmarkConfig& cfg, const std::string& key,
                             const std::string& value) {
  ExperimentConfig tmp;
  tmp.data = cfg;
  if (key.find('.') != std::string::npos) throw ConfigError("unknown benchmark key: " + key);
  try {
    apply_setting(tmp, "data." + key, value);
  } catch (const ConfigError&) {
    bool known = false;
    for (const auto& [name, field] : fields()) known = known || name == "data." + key;
    if (!known) throw ConfigError("unknown benchmark key: " + key);
    throw;
  }
  cfg = tmp.data;
}

ExperimentConfig load_experiment_config(const ExperimentConfig& base,
                                        const std::filesystem::path& file,
                                        const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = base;
  if (!file.empty()) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot read config file: " + file.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    for (const auto& [k, v] : parse_key_values(ss.str(), file.string())) apply_setting(cfg, k, v);
  }
  for (const auto& o : overrides) {
    const auto [k, v] = parse_override(o);
    apply_setting(cfg, k, v);
  }
  cfg.data.validate();
  cfg.train.validate();
  return cfg;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [name, field] : fields()) out.push_back(name);
  return out;
}

std::string format_experiment_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

std::string format_benchmark_config(const BenchmarkConfig& cfg) {
  ExperimentConfig tmp;
  tmp.data = cfg;
  std::string out;
  for (const auto& [name, field] : fields()) {
    if (name.rfind("data.", 0) == 0) out += name.substr(5) + " = " + field.get(tmp) + "\n";
  }
  return out;
}

BenchmarkConfig load_benchmark_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read benchmark config: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  BenchmarkConfig cfg;
  for (const auto& [k, v] : parse_key_values(ss.str(), path.string())) {
    apply_benchmark_setting(cfg, k, v);
  }
  cfg.validate();
  return cfg;
}

}  // namespace rfs
