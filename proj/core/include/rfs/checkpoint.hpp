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

#pragma once

#include <filesystem>

#include "rfs/models.hpp"

namespace rfs {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint: magic "RFSC", version, dims, seed, then named parameter
/// arrays (rows, cols, little-endian f64 values) in declaration order.
/// Classifiers with no classes are omitted.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace rfs
