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

#include <array>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rfs {

#ifdef RFS_REAL_FLOAT32
using Real = float;
#else
using Real = double;
#endif

/// Dense, immutable, row-major matrix. Vectors are 1xN rows and scalars are 1x1.
///
/// Storage is shared between copies; nothing mutates it after construction.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, Real fill = Real(0));
  Tensor(std::size_t rows, std::size_t cols, std::vector<Real> values);

  static Tensor scalar(Real v) { return Tensor(1, 1, v); }
  static Tensor row(std::vector<Real> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<Real>> rows);
  static Tensor identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }
  bool empty() const { return size() == 0; }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

  std::span<const Real> values() const;
  std::span<const Real> row_span(std::size_t r) const;
  Real operator()(std::size_t r, std::size_t c) const;
  Real operator[](std::size_t i) const { return values()[i]; }
  /// Value of a 1x1 tensor.
  Real item() const;

  std::vector<Real> to_vector() const;
  bool all_finite() const;
  /// Bitwise equality of shape and values.
  bool identical(const Tensor& other) const;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::shared_ptr<const std::vector<Real>> data_;
};

std::string shape_string(std::size_t rows, std::size_t cols);

// Plain kernels. The tape builds on these; they never record anything.
namespace kernels {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real c);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_rows(const Tensor& a, std::size_t offset, std::size_t count);
Tensor slice_cols(const Tensor& a, std::size_t offset, std::size_t count);
Tensor sum_rows(const Tensor& a);  // m x n -> 1 x n
Tensor sum_cols(const Tensor& a);  // m x n -> m x 1
Real sum(const Tensor& a);
Real max_abs(const Tensor& a);

}  // namespace kernels

}  // namespace rfs
