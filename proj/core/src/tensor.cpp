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

#include "rfs/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rfs/errors.hpp"

namespace rfs {

std::string shape_string(std::size_t rows, std::size_t cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, Real fill)
    : rows_(rows),
      cols_(cols),
      data_(std::make_shared<const std::vector<Real>>(rows * cols, fill)) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("tensor dimensions must be positive, got " + rfs::shape_string(rows, cols));
  }
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<Real> values)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("tensor dimensions must be positive, got " + rfs::shape_string(rows, cols));
  }
  if (values.size() != rows * cols) {
    throw DimensionError("tensor " + rfs::shape_string(rows, cols) + " given " +
                         std::to_string(values.size()) + " values");
  }
  data_ = std::make_shared<const std::vector<Real>>(std::move(values));
}

Tensor Tensor::row(std::vector<Real> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<Real>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<Real> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for tensor");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(v));
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<Real> v(n * n, Real(0));
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = Real(1);
  return Tensor(n, n, std::move(v));
}

std::span<const Real> Tensor::values() const {
  if (!data_) return {};
  return {data_->data(), data_->size()};
}

std::span<const Real> Tensor::row_span(std::size_t r) const {
  return values().subspan(r * cols_, cols_);
}

Real Tensor::operator()(std::size_t r, std::size_t c) const {
  return (*data_)[r * cols_ + c];
}

Real Tensor::item() const {
  if (!is_scalar()) throw ContractError("item() on non-scalar tensor " + shape_string());
  return (*data_)[0];
}

std::vector<Real> Tensor::to_vector() const {
  auto v = values();
  return {v.begin(), v.end()};
}

bool Tensor::all_finite() const {
  for (Real x : values()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool Tensor::identical(const Tensor& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  if (size() == 0) return true;
  return std::memcmp(values().data(), other.values().data(), size() * sizeof(Real)) == 0;
}

std::string Tensor::shape_string() const { return rfs::shape_string(rows_, cols_); }

namespace kernels {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + a.shape_string() + " * " +
                         b.shape_string());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<Real> out(m * n, Real(0));
  const Real* pa = a.values().data();
  const Real* pb = b.values().data();
  Real* po = out.data();
  // i-k-j order: every output element accumulates over k in ascending order,
  // independent of n, so column subsets of a product are bitwise reproducible.
  for (std::size_t i = 0; i < m; ++i) {
    Real* orow = po + i * n;
    const Real* arow = pa + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = arow[p];
      const Real* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return Tensor(m, n, std::move(out));
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<Real> out(m * n);
  auto v = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = v[i * n + j];
  return Tensor(n, m, std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<Real> out(a.size());
  auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Tensor(a.rows(), a.cols(), std::move(out));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<Real> out(a.size());
  auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return Tensor(a.rows(), a.cols(), std::move(out));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<Real> out(a.size());
  auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return Tensor(a.rows(), a.cols(), std::move(out));
}

Tensor scale(const Tensor& a, Real c) {
  std::vector<Real> out(a.size());
  auto x = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x[i];
  return Tensor(a.rows(), a.cols(), std::move(out));
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("concat_rows: column mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
  std::vector<Real> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  return Tensor(a.rows() + b.rows(), a.cols(), std::move(out));
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
  const std::size_t n = a.cols() + b.cols();
  std::vector<Real> out(a.rows() * n);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy_n(a.row_span(i).begin(), a.cols(), out.begin() + i * n);
    std::copy_n(b.row_span(i).begin(), b.cols(), out.begin() + i * n + a.cols());
  }
  return Tensor(a.rows(), n, std::move(out));
}

Tensor slice_rows(const Tensor& a, std::size_t offset, std::size_t count) {
  if (count == 0 || offset + count > a.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + count) + ") outside " + a.shape_string());
  }
  auto v = a.values().subspan(offset * a.cols(), count * a.cols());
  return Tensor(count, a.cols(), std::vector<Real>(v.begin(), v.end()));
}

Tensor slice_cols(const Tensor& a, std::size_t offset, std::size_t count) {
  if (count == 0 || offset + count > a.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + count) + ") outside " + a.shape_string());
  }
  std::vector<Real> out(a.rows() * count);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy_n(a.row_span(i).begin() + offset, count, out.begin() + i * count);
  }
  return Tensor(a.rows(), count, std::move(out));
}

Tensor sum_rows(const Tensor& a) {
  std::vector<Real> out(a.cols(), Real(0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row_span(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += r[j];
  }
  return Tensor(1, a.cols(), std::move(out));
}

Tensor sum_cols(const Tensor& a) {
  std::vector<Real> out(a.rows(), Real(0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Real s = 0;
    for (Real x : a.row_span(i)) s += x;
    out[i] = s;
  }
  return Tensor(a.rows(), 1, std::move(out));
}

Real sum(const Tensor& a) {
  Real s = 0;
  for (Real x : a.values()) s += x;
  return s;
}

Real max_abs(const Tensor& a) {
  Real m = 0;
  for (Real x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace kernels
}  // namespace rfs
