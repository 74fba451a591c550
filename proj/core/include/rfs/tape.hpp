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

// Reverse-mode differentiation over Tensor values.
//
// Every op applied to a Var appends a node to the Var's Tape. Backward rules
// are themselves written in terms of recorded ops, so the gradients returned
// by Tape::gradient() are ordinary Vars that can be differentiated again.
// That is what makes penalties on input-gradient norms trainable.

#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string_view>
#include <vector>

#include "rfs/tensor.hpp"

namespace rfs {

class Tape;

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kSafeDiv,
  kScale,
  kAddScalar,
  kExp,
  kLog,
  kSqrt,
  kLeakyRelu,
  kLeakyReluBackward,
  kSumAll,
  kSumRows,
  kSumCols,
  kBroadcastScalar,
  kBroadcastRows,
  kBroadcastCols,
  kConcatRows,
  kConcatCols,
  kSliceRows,
  kSliceCols,
  kPadRows,
  kPadCols,
  kLogSumExpRows,
  kSoftmaxRows,
};

std::string_view op_name(Op op);

/// Handle to a node on a Tape. Cheap to copy; valid while the Tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const;
  std::uint32_t id() const { return id_; }

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

struct OpAttr {
  Real scalar = 0;
  std::size_t a = 0;
  std::size_t b = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that gradients can be taken with respect to.
  Var variable(Tensor value);
  /// Leaf that never receives a gradient.
  Var constant(Tensor value);

  std::size_t size() const { return nodes_.size(); }

  /// Exact reverse-mode gradients of a scalar output. The results live on this
  /// tape and are differentiable again. Inputs the output does not depend on
  /// receive zero tensors of their own shape.
  std::vector<Var> gradient(Var output, std::span<const Var> wrt);
  std::vector<Tensor> gradient_values(Var output, std::span<const Var> wrt);

  /// Replace the value of a leaf. Shape must not change.
  void set_value(Var leaf, Tensor value);
  /// Recompute every non-leaf node in recording order from the current leaves.
  void replay();

  // Used by the op functions below.
  Var record(Op op, std::initializer_list<Var> args, OpAttr attr = {});
  const Tensor& value_of(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::uint8_t nargs = 0;
    std::uint32_t args[3] = {0, 0, 0};
    OpAttr attr;
    Tensor value;
    bool requires_grad = false;
  };

  Var push_leaf(Tensor value, bool requires_grad);
  Tensor compute(const Node& node) const;
  void own(Var v) const;

  // deque keeps references returned by Var::value() stable while recording.
  std::deque<Node> nodes_;
};

// -- recorded ops -----------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator-(Var a);
/// Elementwise a / b, defined as 0 where b is exactly 0.
Var safe_div(Var a, Var b);
Var scale(Var a, Real c);
Var add_scalar(Var a, Real c);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
/// x if x >= 0 else slope * x. At exactly 0 the positive branch is used.
Var leaky_relu(Var x, Real slope);
Var relu(Var x);
/// grad * (x >= 0 ? 1 : slope); the derivative of leaky_relu applied to grad.
Var leaky_relu_backward(Var grad, Var x, Real slope);

Var sum(Var a);       // -> 1x1
Var sum_rows(Var a);  // m x n -> 1 x n
Var sum_cols(Var a);  // m x n -> m x 1
Var mean(Var a);
Var broadcast_scalar(Var a, std::size_t rows, std::size_t cols);
Var broadcast_rows(Var a, std::size_t rows);  // 1 x n -> rows x n
Var broadcast_cols(Var a, std::size_t cols);  // m x 1 -> m x cols

Var concat_rows(Var a, Var b);
Var concat_cols(Var a, Var b);
Var slice_rows(Var a, std::size_t offset, std::size_t count);
Var slice_cols(Var a, std::size_t offset, std::size_t count);
Var pad_rows(Var a, std::size_t offset, std::size_t total);
Var pad_cols(Var a, std::size_t offset, std::size_t total);

/// Row-wise log(sum_j mask_ij * exp(x_ij)), m x n -> m x 1. The mask is a
/// constant 0/1 tensor; pass an invalid Var for no mask.
Var logsumexp_rows(Var x, Var mask = {});
/// Row-wise masked softmax; masked entries are exactly 0.
Var softmax_rows(Var x, Var mask = {});

/// Euclidean norm of each row, m x n -> m x 1.
Var row_norms(Var a);
/// Each row divided by its norm; zero rows map to zero.
Var normalize_rows(Var a);

}  // namespace rfs
