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
#include <vector>

#include "rfs/tensor.hpp"

namespace rfs {

/// Principal-component projection fitted on a feature matrix.
struct Pca {
  Tensor mean;        // 1 x D
  Tensor components;  // D x k, columns ordered by decreasing variance
  std::vector<double> eigenvalues;  // all D covariance eigenvalues, descending
  /// Share of total variance kept by the first k components.
  double explained_ratio() const;
};

Pca fit_pca(const Tensor& x, std::size_t k = 2);
Tensor project(const Pca& pca, const Tensor& x);

}  // namespace rfs
