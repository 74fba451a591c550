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
#include "rfs/types.hpp"

namespace rfs {

/// Row-stacked feature vectors with an optional label per row.
struct LabeledFeatures {
  Tensor features;             // n x D_f, empty when n == 0
  std::vector<ClassId> labels; // n entries, or empty for unlabeled batches

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

/// Rows of a tensor selected by index, in the given order.
Tensor gather_rows(const Tensor& t, const std::vector<std::size_t>& rows);
LabeledFeatures gather(const LabeledFeatures& f, const std::vector<std::size_t>& rows);
LabeledFeatures concat(const LabeledFeatures& a, const LabeledFeatures& b);

}  // namespace rfs
