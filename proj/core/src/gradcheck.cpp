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

#include "rfs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfs/errors.hpp"

namespace rfs {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const ScalarFn& fn, std::span<const Tensor> inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  double v = 0;
  try {
    const Var out = fn(tape, vars);
    v = static_cast<double>(out.value().item());
  } catch (const NumericError& e) {
    throw OracleError(std::string("function not finite at probe point: ") + e.what());
  }
  if (!std::isfinite(v)) throw OracleError("function not finite at probe point");
  return v;
}

Tensor with_entry(const Tensor& t, std::size_t index, Real value) {
  std::vector<Real> v = t.to_vector();
  v[index] = value;
  return Tensor(t.rows(), t.cols(), std::move(v));
}

}  // namespace

GradCheckResult finite_diff_check(const ScalarFn& fn, std::span<const Tensor> inputs,
                                  const GradCheckOptions& options) {
  if (!(options.eps > 0)) throw ContractError("finite_diff_check: eps must be positive");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
    const Var out = fn(tape, vars);
    if (!std::isfinite(static_cast<double>(out.value().item()))) {
      throw OracleError("function not finite at the base point");
    }
    analytic = tape.gradient_values(out, vars);
  }

  GradCheckResult result;
  std::vector<Tensor> probe(inputs.begin(), inputs.end());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& base = inputs[k];
    const std::size_t n = base.size();
    std::size_t stride = 1;
    if (options.max_entries_per_input > 0 && n > options.max_entries_per_input) {
      stride = (n + options.max_entries_per_input - 1) / options.max_entries_per_input;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const Real x0 = base[i];
      probe[k] = with_entry(base, i, x0 + static_cast<Real>(options.eps));
      const double fp = evaluate(fn, probe);
      probe[k] = with_entry(base, i, x0 - static_cast<Real>(options.eps));
      const double fm = evaluate(fn, probe);
      probe[k] = base;

      const double numeric = (fp - fm) / (2.0 * options.eps);
      const double a = static_cast<double>(analytic[k][i]) + options.corrupt_analytic;
      // Differences below the rounding error of the central difference itself
      // cannot be resolved; exact-zero gradients otherwise read as large errors.
      const double rounding = 4.0 * std::numeric_limits<double>::epsilon() *
                              std::max({std::abs(fp), std::abs(fm), 1.0}) / (2.0 * options.eps);
      const double err = std::abs(a - numeric) <= rounding ? 0.0 : relative_error(a, numeric);
      ++result.entries_checked;
      if (err > result.max_rel_error || result.entries_checked == 1) {
        result.max_rel_error = err;
        result.worst_input = k;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

GradCheckResult finite_diff_check(const std::function<Var(Tape&, Var)>& fn, const Tensor& x,
                                  double eps) {
  GradCheckOptions options;
  options.eps = eps;
  const Tensor inputs[] = {x};
  return finite_diff_check(
      [&fn](Tape& tape, std::span<const Var> vars) { return fn(tape, vars[0]); }, inputs,
      options);
}

}  // namespace rfs
