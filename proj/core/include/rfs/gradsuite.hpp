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

// Finite-difference verification of every training loss on random small
// instances, shared by the CLI and the test suites.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rfs {

struct GradSuiteOptions {
  std::size_t instances = 20;
  std::uint64_t seed = 7;
  double tolerance = 1e-4;
  double eps = 1e-5;
  /// Test hook forwarded to GradCheckOptions::corrupt_analytic.
  double corrupt_analytic = 0;
};

struct GradSuiteEntry {
  std::string name;
  std::size_t instances = 0;
  std::size_t entries = 0;
  double max_rel_error = 0;
  bool passed = false;
};

std::vector<GradSuiteEntry> run_gradient_suite(const GradSuiteOptions& options = {});

}  // namespace rfs
