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

// Flat key=value experiment configuration with section prefixes
// (data., train., loss., sample.). Unknown keys are rejected.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfs/data.hpp"
#include "rfs/pipeline.hpp"

namespace rfs {

struct ExperimentConfig {
  BenchmarkConfig data;
  TrainConfig train;
};

using KeyValue = std::pair<std::string, std::string>;

/// Parses "key = value" lines. Blank lines and '#' comments are skipped.
/// 'source' names the input in error messages.
std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& source);
/// Splits one "key=value" override.
KeyValue parse_override(std::string_view text);

/// Applies one prefixed key. Throws ConfigError naming the key if it is unknown
/// or the value does not parse.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Applies one un-prefixed benchmark key.
void apply_benchmark_setting(BenchmarkConfig& cfg, const std::string& key,
                             const std::string& value);

/// Starts from 'base', applies the file (if non-empty) and then the overrides, then validates.
ExperimentConfig load_experiment_config(const ExperimentConfig& base,
                                        const std::filesystem::path& file,
                                        const std::vector<std::string>& overrides);

std::vector<std::string> known_keys();
std::string format_experiment_config(const ExperimentConfig& cfg);
std::string format_benchmark_config(const BenchmarkConfig& cfg);
BenchmarkConfig load_benchmark_config(const std::filesystem::path& path);

}  // namespace rfs
