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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rfs/tape.hpp"

namespace rfs {

/// Builds a scalar on the given tape from bound inputs.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
  std::size_t entries_checked = 0;
};

struct GradCheckOptions {
  double eps = 1e-5;
  /// Check at most this many entries per input (0 = all), spread evenly.
  std::size_t max_entries_per_input = 0;
  /// Test hook: added to every analytic gradient entry before comparison.
  double corrupt_analytic = 0;
};

/// |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients of fn against central differences at the
/// given inputs. Entries whose difference is within the rounding error of the
/// central difference count as exact matches. Throws OracleError if fn is
/// not finite at a probe point.
GradCheckResult finite_diff_check(const ScalarFn& fn, std::span<const Tensor> inputs,
                                  const GradCheckOptions& options = {});

/// Single-input convenience form.
GradCheckResult finite_diff_check(const std::function<Var(Tape&, Var)>& fn, const Tensor& x,
                                  double eps);

}  // namespace rfs
