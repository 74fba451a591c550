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

#include "rfs/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfs/errors.hpp"

namespace rfs {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kSafeDiv: return "safe_div";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kLeakyRelu: return "leaky_relu";
    case Op::kLeakyReluBackward: return "leaky_relu_backward";
    case Op::kSumAll: return "sum";
    case Op::kSumRows: return "sum_rows";
    case Op::kSumCols: return "sum_cols";
    case Op::kBroadcastScalar: return "broadcast_scalar";
    case Op::kBroadcastRows: return "broadcast_rows";
    case Op::kBroadcastCols: return "broadcast_cols";
    case Op::kConcatRows: return "concat_rows";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSliceRows: return "slice_rows";
    case Op::kSliceCols: return "slice_cols";
    case Op::kPadRows: return "pad_rows";
    case Op::kPadCols: return "pad_cols";
    case Op::kLogSumExpRows: return "logsumexp_rows";
    case Op::kSoftmaxRows: return "softmax_rows";
  }
  return "unknown";
}

Tape& Var::tape() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return *tape_;
}

const Tensor& Var::value() const { return tape().value_of(id_); }

bool Var::requires_grad() const { return tape().requires_grad(id_); }

Var Tape::push_leaf(Tensor value, bool requires_grad) {
  if (value.empty()) throw DimensionError("tape leaf must be non-empty");
  if (!value.all_finite()) throw NumericError("non-finite value recorded as tape leaf");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::variable(Tensor value) { return push_leaf(std::move(value), true); }
Var Tape::constant(Tensor value) { return push_leaf(std::move(value), false); }

void Tape::own(Var v) const {
  if (!v.valid()) throw ContractError("unbound Var passed to tape");
  if (&v.tape() != this) throw ContractError("Var belongs to a different tape");
}

Var Tape::record(Op op, std::initializer_list<Var> args, OpAttr attr) {
  Node n;
  n.op = op;
  n.attr = attr;
  for (Var a : args) {
    if (!a.valid()) continue;
    own(a);
    n.args[n.nargs++] = a.id();
    n.requires_grad = n.requires_grad || nodes_[a.id()].requires_grad;
  }
  n.value = compute(n);
  if (!n.value.all_finite()) {
    throw NumericError("non-finite output from " + std::string(op_name(op)) + " " +
                       n.value.shape_string());
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::set_value(Var leaf, Tensor value) {
  own(leaf);
  Node& n = nodes_[leaf.id()];
  if (n.op != Op::kLeaf) throw ContractError("set_value on a non-leaf node");
  if (value.shape() != n.value.shape()) {
    throw DimensionError("set_value shape " + value.shape_string() + " does not match leaf " +
                         n.value.shape_string());
  }
  if (!value.all_finite()) throw NumericError("non-finite value assigned to tape leaf");
  n.value = std::move(value);
}

void Tape::replay() {
  for (Node& n : nodes_) {
    if (n.op == Op::kLeaf) continue;
    n.value = compute(n);
    if (!n.value.all_finite()) {
      throw NumericError("non-finite output from " + std::string(op_name(n.op)) + " on replay");
    }
  }
}

namespace {

template <typename F>
Tensor map1(const Tensor& a, F f) {
  std::vector<Real> out(a.size());
  auto v = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(v[i]);
  return Tensor(a.rows(), a.cols(), std::move(out));
}

void require_mask_shape(const Tensor& x, const Tensor* mask) {
  if (mask && mask->shape() != x.shape()) {
    throw DimensionError("mask " + mask->shape_string() + " does not match " + x.shape_string());
  }
}

Tensor logsumexp_rows_kernel(const Tensor& x, const Tensor* mask) {
  require_mask_shape(x, mask);
  std::vector<Real> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row_span(i);
    Real m = -std::numeric_limits<Real>::infinity();
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (!mask || (*mask)(i, j) != Real(0)) m = std::max(m, r[j]);
    }
    if (!std::isfinite(m)) throw ContractError("logsumexp_rows: row " + std::to_string(i) +
                                               " has no unmasked entries");
    Real s = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (!mask || (*mask)(i, j) != Real(0)) s += std::exp(r[j] - m);
    }
    out[i] = m + std::log(s);
  }
  return Tensor(x.rows(), 1, std::move(out));
}

Tensor softmax_rows_kernel(const Tensor& x, const Tensor* mask) {
  const Tensor lse = logsumexp_rows_kernel(x, mask);
  std::vector<Real> out(x.size(), Real(0));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row_span(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (!mask || (*mask)(i, j) != Real(0)) out[i * x.cols() + j] = std::exp(r[j] - lse(i, 0));
    }
  }
  return Tensor(x.rows(), x.cols(), std::move(out));
}

}  // namespace

Tensor Tape::compute(const Node& n) const {
  auto arg = [&](int k) -> const Tensor& { return nodes_[n.args[k]].value; };
  const OpAttr& at = n.attr;
  switch (n.op) {
    case Op::kLeaf:
      return n.value;
    case Op::kMatMul:
      return kernels::matmul(arg(0), arg(1));
    case Op::kTranspose:
      return kernels::transpose(arg(0));
    case Op::kAdd:
      return kernels::add(arg(0), arg(1));
    case Op::kSub:
      return kernels::sub(arg(0), arg(1));
    case Op::kMul:
      return kernels::mul(arg(0), arg(1));
    case Op::kSafeDiv: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      if (a.shape() != b.shape()) {
        throw DimensionError("safe_div: shape mismatch " + a.shape_string() + " vs " +
                             b.shape_string());
      }
      std::vector<Real> out(a.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = b[i] == Real(0) ? Real(0) : a[i] / b[i];
      }
      return Tensor(a.rows(), a.cols(), std::move(out));
    }
    case Op::kScale:
      return kernels::scale(arg(0), at.scalar);
    case Op::kAddScalar:
      return map1(arg(0), [c = at.scalar](Real x) { return x + c; });
    case Op::kExp:
      return map1(arg(0), [](Real x) { return std::exp(x); });
    case Op::kLog:
      return map1(arg(0), [](Real x) { return std::log(x); });
    case Op::kSqrt:
      return map1(arg(0), [](Real x) { return std::sqrt(x); });
    case Op::kLeakyRelu:
      return map1(arg(0), [s = at.scalar](Real x) { return x >= Real(0) ? x : s * x; });
    case Op::kLeakyReluBackward: {
      const Tensor& g = arg(0);
      const Tensor& x = arg(1);
      if (g.shape() != x.shape()) throw DimensionError("leaky_relu_backward: shape mismatch");
      std::vector<Real> out(g.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] >= Real(0) ? g[i] : at.scalar * g[i];
      }
      return Tensor(g.rows(), g.cols(), std::move(out));
    }
    case Op::kSumAll:
      return Tensor::scalar(kernels::sum(arg(0)));
    case Op::kSumRows:
      return kernels::sum_rows(arg(0));
    case Op::kSumCols:
      return kernels::sum_cols(arg(0));
    case Op::kBroadcastScalar:
      if (!arg(0).is_scalar()) throw DimensionError("broadcast_scalar expects a 1x1 input");
      return Tensor(at.a, at.b, arg(0).item());
    case Op::kBroadcastRows: {
      const Tensor& a = arg(0);
      if (a.rows() != 1) throw DimensionError("broadcast_rows expects a 1xn input");
      std::vector<Real> out;
      out.reserve(at.a * a.cols());
      for (std::size_t i = 0; i < at.a; ++i) out.insert(out.end(), a.values().begin(), a.values().end());
      return Tensor(at.a, a.cols(), std::move(out));
    }
    case Op::kBroadcastCols: {
      const Tensor& a = arg(0);
      if (a.cols() != 1) throw DimensionError("broadcast_cols expects an mx1 input");
      std::vector<Real> out(a.rows() * at.a);
      for (std::size_t i = 0; i < a.rows(); ++i) {
        std::fill_n(out.begin() + i * at.a, at.a, a[i]);
      }
      return Tensor(a.rows(), at.a, std::move(out));
    }
    case Op::kConcatRows:
      return kernels::concat_rows(arg(0), arg(1));
    case Op::kConcatCols:
      return kernels::concat_cols(arg(0), arg(1));
    case Op::kSliceRows:
      return kernels::slice_rows(arg(0), at.a, at.b);
    case Op::kSliceCols:
      return kernels::slice_cols(arg(0), at.a, at.b);
    case Op::kPadRows: {
      const Tensor& a = arg(0);
      if (at.a + a.rows() > at.b) throw DimensionError("pad_rows: block exceeds target rows");
      std::vector<Real> out(at.b * a.cols(), Real(0));
      std::copy(a.values().begin(), a.values().end(), out.begin() + at.a * a.cols());
      return Tensor(at.b, a.cols(), std::move(out));
    }
    case Op::kPadCols: {
      const Tensor& a = arg(0);
      if (at.a + a.cols() > at.b) throw DimensionError("pad_cols: block exceeds target cols");
      std::vector<Real> out(a.rows() * at.b, Real(0));
      for (std::size_t i = 0; i < a.rows(); ++i) {
        std::copy_n(a.row_span(i).begin(), a.cols(), out.begin() + i * at.b + at.a);
      }
      return Tensor(a.rows(), at.b, std::move(out));
    }
    case Op::kLogSumExpRows:
      return logsumexp_rows_kernel(arg(0), n.nargs > 1 ? &arg(1) : nullptr);
    case Op::kSoftmaxRows:
      return softmax_rows_kernel(arg(0), n.nargs > 1 ? &arg(1) : nullptr);
  }
  throw ContractError("unknown op");
}

std::vector<Var> Tape::gradient(Var output, std::span<const Var> wrt) {
  own(output);
  if (!output.value().is_scalar()) {
    throw ContractError("gradient() needs a scalar output, got " + output.value().shape_string());
  }
  for (Var v : wrt) own(v);

  const std::uint32_t out_id = output.id();
  const std::size_t n = static_cast<std::size_t>(out_id) + 1;

  // A node is relevant when it depends on one of the wrt nodes.
  std::vector<char> relevant(n, 0);
  for (Var v : wrt) {
    if (v.id() < n) relevant[v.id()] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (relevant[i]) continue;
    const Node& node = nodes_[i];
    for (int k = 0; k < node.nargs; ++k) {
      if (relevant[node.args[k]]) {
        relevant[i] = 1;
        break;
      }
    }
  }

  std::vector<Var> adj(n);
  auto accumulate = [&](std::uint32_t id, Var contrib) {
    if (!relevant[id]) return;
    adj[id] = adj[id].valid() ? adj[id] + contrib : contrib;
  };

  if (relevant[out_id]) adj[out_id] = constant(Tensor::scalar(Real(1)));

  for (std::size_t idx = n; idx-- > 0;) {
    if (!adj[idx].valid()) continue;
    // Copy the node header: recording below may grow the deque.
    const Op op = nodes_[idx].op;
    if (op == Op::kLeaf) continue;
    const OpAttr at = nodes_[idx].attr;
    const std::uint8_t nargs = nodes_[idx].nargs;
    const std::uint32_t a0 = nodes_[idx].args[0];
    const std::uint32_t a1 = nodes_[idx].args[1];
    const Var g = adj[idx];
    const Var self(this, static_cast<std::uint32_t>(idx));
    const Var x(this, a0);
    const Var y(this, a1);
    const Tensor& xv = nodes_[a0].value;

    switch (op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul:
        if (relevant[a0]) accumulate(a0, matmul(g, transpose(y)));
        if (relevant[a1]) accumulate(a1, matmul(transpose(x), g));
        break;
      case Op::kTranspose:
        accumulate(a0, transpose(g));
        break;
      case Op::kAdd:
        accumulate(a0, g);
        accumulate(a1, g);
        break;
      case Op::kSub:
        accumulate(a0, g);
        if (relevant[a1]) accumulate(a1, scale(g, Real(-1)));
        break;
      case Op::kMul:
        if (relevant[a0]) accumulate(a0, g * y);
        if (relevant[a1]) accumulate(a1, g * x);
        break;
      case Op::kSafeDiv:
        if (relevant[a0]) accumulate(a0, safe_div(g, y));
        if (relevant[a1]) accumulate(a1, scale(safe_div(g * self, y), Real(-1)));
        break;
      case Op::kScale:
        accumulate(a0, scale(g, at.scalar));
        break;
      case Op::kAddScalar:
        accumulate(a0, g);
        break;
      case Op::kExp:
        accumulate(a0, g * self);
        break;
      case Op::kLog:
        accumulate(a0, safe_div(g, x));
        break;
      case Op::kSqrt:
        accumulate(a0, safe_div(scale(g, Real(0.5)), self));
        break;
      case Op::kLeakyRelu:
        accumulate(a0, leaky_relu_backward(g, x, at.scalar));
        break;
      case Op::kLeakyReluBackward:
        // Piecewise linear in its first argument; zero derivative in x almost everywhere.
        accumulate(a0, leaky_relu_backward(g, y, at.scalar));
        break;
      case Op::kSumAll:
        accumulate(a0, broadcast_scalar(g, xv.rows(), xv.cols()));
        break;
      case Op::kSumRows:
        accumulate(a0, broadcast_rows(g, xv.rows()));
        break;
      case Op::kSumCols:
        accumulate(a0, broadcast_cols(g, xv.cols()));
        break;
      case Op::kBroadcastScalar:
        accumulate(a0, sum(g));
        break;
      case Op::kBroadcastRows:
        accumulate(a0, sum_rows(g));
        break;
      case Op::kBroadcastCols:
        accumulate(a0, sum_cols(g));
        break;
      case Op::kConcatRows: {
        const std::size_t ra = xv.rows();
        const std::size_t rb = nodes_[a1].value.rows();
        if (relevant[a0]) accumulate(a0, slice_rows(g, 0, ra));
        if (relevant[a1]) accumulate(a1, slice_rows(g, ra, rb));
        break;
      }
      case Op::kConcatCols: {
        const std::size_t ca = xv.cols();
        const std::size_t cb = nodes_[a1].value.cols();
        if (relevant[a0]) accumulate(a0, slice_cols(g, 0, ca));
        if (relevant[a1]) accumulate(a1, slice_cols(g, ca, cb));
        break;
      }
      case Op::kSliceRows:
        accumulate(a0, pad_rows(g, at.a, xv.rows()));
        break;
      case Op::kSliceCols:
        accumulate(a0, pad_cols(g, at.a, xv.cols()));
        break;
      case Op::kPadRows:
        accumulate(a0, slice_rows(g, at.a, xv.rows()));
        break;
      case Op::kPadCols:
        accumulate(a0, slice_cols(g, at.a, xv.cols()));
        break;
      case Op::kLogSumExpRows: {
        const Var mask = nargs > 1 ? y : Var();
        accumulate(a0, broadcast_cols(g, xv.cols()) * softmax_rows(x, mask));
        break;
      }
      case Op::kSoftmaxRows: {
        const Var gy = g * self;
        accumulate(a0, gy - self * broadcast_cols(sum_cols(gy), xv.cols()));
        break;
      }
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (Var v : wrt) {
    if (v.id() < n && adj[v.id()].valid()) {
      out.push_back(adj[v.id()]);
    } else {
      const Tensor& val = v.value();
      out.push_back(constant(Tensor(val.rows(), val.cols(), Real(0))));
    }
  }
  return out;
}

std::vector<Tensor> Tape::gradient_values(Var output, std::span<const Var> wrt) {
  std::vector<Tensor> out;
  for (Var g : gradient(output, wrt)) out.push_back(g.value());
  return out;
}

// -- op functions -------------------------------------------------------------

Var matmul(Var a, Var b) { return a.tape().record(Op::kMatMul, {a, b}); }
Var transpose(Var a) { return a.tape().record(Op::kTranspose, {a}); }
Var operator+(Var a, Var b) { return a.tape().record(Op::kAdd, {a, b}); }
Var operator-(Var a, Var b) { return a.tape().record(Op::kSub, {a, b}); }
Var operator*(Var a, Var b) { return a.tape().record(Op::kMul, {a, b}); }
Var operator-(Var a) { return scale(a, Real(-1)); }
Var safe_div(Var a, Var b) { return a.tape().record(Op::kSafeDiv, {a, b}); }

Var scale(Var a, Real c) {
  OpAttr at;
  at.scalar = c;
  return a.tape().record(Op::kScale, {a}, at);
}

Var add_scalar(Var a, Real c) {
  OpAttr at;
  at.scalar = c;
  return a.tape().record(Op::kAddScalar, {a}, at);
}

Var exp(Var a) { return a.tape().record(Op::kExp, {a}); }

Var log(Var a) {
  for (Real v : a.value().values()) {
    if (!(v > Real(0))) throw NumericError("log of a non-positive value");
  }
  return a.tape().record(Op::kLog, {a});
}

Var sqrt(Var a) {
  for (Real v : a.value().values()) {
    if (v < Real(0)) throw NumericError("sqrt of a negative value");
  }
  return a.tape().record(Op::kSqrt, {a});
}

Var leaky_relu(Var x, Real slope) {
  OpAttr at;
  at.scalar = slope;
  return x.tape().record(Op::kLeakyRelu, {x}, at);
}

Var relu(Var x) { return leaky_relu(x, Real(0)); }

Var leaky_relu_backward(Var grad, Var x, Real slope) {
  OpAttr at;
  at.scalar = slope;
  return grad.tape().record(Op::kLeakyReluBackward, {grad, x}, at);
}

Var sum(Var a) { return a.tape().record(Op::kSumAll, {a}); }
Var sum_rows(Var a) { return a.tape().record(Op::kSumRows, {a}); }
Var sum_cols(Var a) { return a.tape().record(Op::kSumCols, {a}); }

Var mean(Var a) { return scale(sum(a), Real(1) / static_cast<Real>(a.value().size())); }

Var broadcast_scalar(Var a, std::size_t rows, std::size_t cols) {
  OpAttr at;
  at.a = rows;
  at.b = cols;
  return a.tape().record(Op::kBroadcastScalar, {a}, at);
}

Var broadcast_rows(Var a, std::size_t rows) {
  OpAttr at;
  at.a = rows;
  return a.tape().record(Op::kBroadcastRows, {a}, at);
}

Var broadcast_cols(Var a, std::size_t cols) {
  OpAttr at;
  at.a = cols;
  return a.tape().record(Op::kBroadcastCols, {a}, at);
}

Var concat_rows(Var a, Var b) { return a.tape().record(Op::kConcatRows, {a, b}); }
Var concat_cols(Var a, Var b) { return a.tape().record(Op::kConcatCols, {a, b}); }

Var slice_rows(Var a, std::size_t offset, std::size_t count) {
  OpAttr at;
  at.a = offset;
  at.b = count;
  return a.tape().record(Op::kSliceRows, {a}, at);
}

Var slice_cols(Var a, std::size_t offset, std::size_t count) {
  OpAttr at;
  at.a = offset;
  at.b = count;
  return a.tape().record(Op::kSliceCols, {a}, at);
}

Var pad_rows(Var a, std::size_t offset, std::size_t total) {
  OpAttr at;
  at.a = offset;
  at.b = total;
  return a.tape().record(Op::kPadRows, {a}, at);
}

Var pad_cols(Var a, std::size_t offset, std::size_t total) {
  OpAttr at;
  at.a = offset;
  at.b = total;
  return a.tape().record(Op::kPadCols, {a}, at);
}

Var logsumexp_rows(Var x, Var mask) { return x.tape().record(Op::kLogSumExpRows, {x, mask}); }
Var softmax_rows(Var x, Var mask) { return x.tape().record(Op::kSoftmaxRows, {x, mask}); }

Var row_norms(Var a) { return sqrt(sum_cols(a * a)); }

Var normalize_rows(Var a) {
  // Zero rows stay zero (and receive no gradient) instead of dividing by zero.
  return safe_div(a, broadcast_cols(row_norms(a), a.cols()));
}

}  // namespace rfs
