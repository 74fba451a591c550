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

#include "rfs/optim.hpp"

#include <cmath>

#include "rfs/errors.hpp"

namespace rfs {

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ContractError("Adam::step: parameter and gradient counts differ");
  }
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.emplace_back(p->size(), Real(0));
      v_.emplace_back(p->size(), Real(0));
    }
  }
  if (m_.size() != params.size()) throw ContractError("Adam::step: parameter list changed");

  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& p = *params[k];
    const Tensor& g = grads[k];
    if (p.shape() != g.shape() || m_[k].size() != p.size()) {
      throw DimensionError("Adam::step: gradient " + g.shape_string() + " for parameter " +
                           p.shape_string());
    }
    std::vector<Real> next(p.size());
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      m[i] = static_cast<Real>(b1 * m[i] + (1.0 - b1) * gi);
      v[i] = static_cast<Real>(b2 * v[i] + (1.0 - b2) * gi * gi);
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      next[i] = static_cast<Real>(p[i] - config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon));
    }
    *params[k] = Tensor(p.rows(), p.cols(), std::move(next));
  }
}

}  // namespace rfs
