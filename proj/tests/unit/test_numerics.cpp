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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rfs/errors.hpp"
#include "rfs/gradcheck.hpp"
#include "rfs/losses.hpp"
#include "rfs/models.hpp"
#include "rfs/tape.hpp"
#include "rfs/tensor.hpp"

namespace rfs {
namespace {

using testing::Matrix;

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Real> v(r * c);
  for (auto& x : v) x = static_cast<Real>(u(rng));
  return Tensor(r, c, std::move(v));
}

Matrix to_matrix(const Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  }
  return m;
}

TEST(Matmul, IdentityAndScalar) {
  const Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  EXPECT_TRUE(kernels::matmul(a, Tensor::identity(2)).identical(a));
  EXPECT_EQ(kernels::matmul(Tensor::scalar(2), Tensor::scalar(3)).item(), 6);
}

TEST(Matmul, MatchesTripleLoopOracle) {
  Rng rng(3);
  const Tensor a = random_tensor(5, 7, rng), b = random_tensor(7, 3, rng);
  const Tensor c = kernels::matmul(a, b);
  const Matrix ref = testing::naive_matmul(to_matrix(a), to_matrix(b));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_LE(std::abs(c(i, j) - ref[i][j]), 1e-12 * std::max(1.0, std::abs(ref[i][j])));
    }
  }
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(kernels::matmul(Tensor(2, 3), Tensor(2, 3)), DimensionError);
  Tape tape;
  EXPECT_THROW(matmul(tape.variable(Tensor(2, 3)), tape.variable(Tensor(2, 3))), DimensionError);
}

TEST(LeakyRelu, Branches) {
  Tape tape;
  const Var x = tape.variable(Tensor::row({3, -1, 0}));
  const Tensor y = leaky_relu(x, 0.2).value();
  EXPECT_EQ(y[0], 3);
  EXPECT_NEAR(y[1], -0.2, 1e-15);
  EXPECT_EQ(y[2], 0);
}

TEST(LeakyRelu, DerivativeMatchesFiniteDifference) {
  Tape tape;
  const Var x = tape.variable(Tensor::scalar(-1));
  const Tensor g = tape.gradient_values(sum(leaky_relu(x, 0.2)), std::vector<Var>{x})[0];
  const double h = 1e-5;
  const double fd = ((-1 + h) * 0.2 - (-1 - h) * 0.2) / (2 * h);
  EXPECT_NEAR(g.item(), 0.2, 1e-8);
  EXPECT_NEAR(g.item(), fd, 1e-8);
}

TEST(LeakyRelu, ZeroTakesPositiveBranch) {
  Tape tape;
  const Var x = tape.variable(Tensor::scalar(0));
  EXPECT_EQ(tape.gradient_values(sum(leaky_relu(x, 0.2)), std::vector<Var>{x})[0].item(), 1);
}

TEST(Gradient, Quadratic) {
  Tape tape;
  const Var x = tape.variable(Tensor::row({1, 2}));
  const Tensor g = tape.gradient_values(sum(x * x), std::vector<Var>{x})[0];
  EXPECT_EQ(g[0], 2);
  EXPECT_EQ(g[1], 4);
}

TEST(Gradient, ConstantOutputGivesZeros) {
  Tape tape;
  const Var x = tape.variable(Tensor::row({1, 2}));
  const Var c = tape.constant(Tensor::scalar(5));
  const Tensor g = tape.gradient_values(sum(c), std::vector<Var>{x})[0];
  EXPECT_EQ(g.shape(), x.value().shape());
  EXPECT_EQ(g[0], 0);
  EXPECT_EQ(g[1], 0);
}

TEST(Gradient, NonScalarOutputIsContractError) {
  Tape tape;
  const Var x = tape.variable(Tensor::row({1, 2}));
  EXPECT_THROW(tape.gradient(x * x, std::vector<Var>{x}), ContractError);
}

TEST(Gradient, TwoLayerMlpMatchesFiniteDifferences) {
  Rng rng(11);
  const std::vector<Tensor> inputs = {random_tensor(4, 5, rng), random_tensor(5, 6, rng),
                                      random_tensor(1, 6, rng), random_tensor(6, 1, rng)};
  const ScalarFn fn = [](Tape&, std::span<const Var> v) {
    const Var h = leaky_relu(matmul(v[0], v[1]) + broadcast_rows(v[2], v[0].rows()), 0.2);
    return sum(matmul(h, v[3]));
  };
  EXPECT_LT(finite_diff_check(fn, inputs).max_rel_error, 1e-6);
}

TEST(InputGradNorm, ConstantCriticHasZeroNormAndUnitPenalty) {
  Tape tape;
  const Var f = tape.variable(Tensor::row({0.3, -0.7}));
  const Var d = add_scalar(scale(sum(f), 0), 2.5);
  const Var n = input_grad_norm(d, f);
  EXPECT_EQ(n.value().item(), 0);
  const Var dev = add_scalar(n, -1);
  EXPECT_EQ((dev * dev).value().item(), 1);
}

TEST(InputGradNorm, LinearCriticThreeFourFive) {
  for (const auto& fv : {std::vector<Real>{0, 0}, std::vector<Real>{1, -2}, std::vector<Real>{10, 7}}) {
    Tape tape;
    const Var f = tape.variable(Tensor::row(fv));
    const Var a = tape.constant(Tensor::from_rows({{3}, {4}}));
    EXPECT_NEAR(input_grad_norm(sum(matmul(f, a)), f).value().item(), 5, 1e-14);
  }
}

TEST(InputGradNorm, InputOffTapeIsContractError) {
  Tape t1, t2;
  const Var f = t1.variable(Tensor::row({1, 2}));
  const Var g = t2.variable(Tensor::row({1, 2}));
  EXPECT_THROW(input_grad_norm(sum(f * f), g), ContractError);
}

TEST(InputGradNorm, PenaltyParameterGradientOfTwoLayerCritic) {
  Rng rng(5);
  const Tensor f = random_tensor(1, 3, rng);
  const std::vector<Tensor> params = {random_tensor(3, 4, rng), random_tensor(1, 4, rng),
                                      random_tensor(4, 1, rng)};
  const ScalarFn fn = [&](Tape& tape, std::span<const Var> p) {
    const Var fv = tape.variable(f);
    const Var d = sum(matmul(leaky_relu(matmul(fv, p[0]) + p[1], 0.2), p[2]));
    const Var dev = add_scalar(input_grad_norm(d, fv), -1);
    return sum(dev * dev);
  };
  EXPECT_LT(finite_diff_check(fn, params).max_rel_error, 1e-5);
}

TEST(InputGradNorm, SecondOrderQuadraticCritic) {
  // D(f) = 0.5 |A f|^2, so grad_f D = A^T A f.
  Rng rng(9);
  const Tensor f = random_tensor(3, 1, rng);
  const ScalarFn fn = [&](Tape& tape, std::span<const Var> p) {
    const Var fv = tape.variable(f);
    const Var af = matmul(p[0], fv);
    const Var d = scale(sum(af * af), 0.5);
    const Var dev = add_scalar(input_grad_norm(d, fv), -1);
    return sum(dev * dev);
  };
  const std::vector<Tensor> a = {random_tensor(4, 3, rng)};
  EXPECT_LT(finite_diff_check(fn, a).max_rel_error, 1e-5);

  // Analytic value of the norm against a direct computation.
  Tape tape;
  const Var av = tape.variable(a[0]);
  const Var fv = tape.variable(f);
  const Var af = matmul(av, fv);
  const double norm = input_grad_norm(scale(sum(af * af), 0.5), fv).value().item();
  const Matrix am = to_matrix(a[0]);
  Matrix at(3, std::vector<double>(4));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) at[j][i] = am[i][j];
  }
  const Matrix g = testing::naive_matmul(testing::naive_matmul(at, am), to_matrix(f));
  double ref = 0;
  for (const auto& r : g) ref += r[0] * r[0];
  EXPECT_NEAR(norm, std::sqrt(ref), 1e-12);
}

TEST(FiniteDiffCheck, Examples) {
  const auto squares = [](Tape&, Var x) { return sum(x * x); };
  EXPECT_LT(finite_diff_check(squares, Tensor::row({1, -1}), 1e-5).max_rel_error, 1e-7);
  const auto lrelu = [](Tape&, Var x) { return sum(leaky_relu(x, 0.2)); };
  EXPECT_LT(finite_diff_check(lrelu, Tensor::row({2, -3, 1.5, -0.8}), 1e-5).max_rel_error, 1e-7);
}

TEST(FiniteDiffCheck, NonFiniteFunctionIsOracleError) {
  const auto bad = [](Tape&, Var x) { return sum(log(x)); };
  EXPECT_THROW(finite_diff_check(bad, Tensor::row({1e-6, 1}), 1e-5), OracleError);
}

TEST(FiniteDiffCheck, CorruptedGradientIsDetected) {
  const ScalarFn fn = [](Tape&, std::span<const Var> v) { return sum(v[0] * v[0]); };
  GradCheckOptions opt;
  opt.corrupt_analytic = 1e-2;
  const std::vector<Tensor> x = {Tensor::row({1, -1})};
  EXPECT_GT(finite_diff_check(fn, x, opt).max_rel_error, 1e-4);
}

TEST(FiniteDiffCheck, RelativeErrorDenominator) {
  EXPECT_DOUBLE_EQ(relative_error(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0, 1e-9), 1e-9 / 1e-8);
}

// Every primitive against central differences on 100 random inputs, away from kinks.
TEST(Primitives, FiniteDifferencesOnRandomInputs) {
  using Builder = std::function<Var(Tape&, std::span<const Var>)>;
  struct Case {
    const char* name;
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    bool positive;
    Builder fn;
  };
  const std::vector<Case> cases = {
      {"matmul", {{3, 4}, {4, 2}}, false, [](Tape&, auto v) { return matmul(v[0], v[1]); }},
      {"transpose", {{3, 4}}, false, [](Tape&, auto v) { return transpose(v[0]); }},
      {"add", {{2, 3}, {2, 3}}, false, [](Tape&, auto v) { return v[0] + v[1]; }},
      {"sub", {{2, 3}, {2, 3}}, false, [](Tape&, auto v) { return v[0] - v[1]; }},
      {"mul", {{2, 3}, {2, 3}}, false, [](Tape&, auto v) { return v[0] * v[1]; }},
      {"safe_div", {{2, 3}, {2, 3}}, true, [](Tape&, auto v) { return safe_div(v[0], v[1]); }},
      {"exp", {{2, 3}}, false, [](Tape&, auto v) { return exp(v[0]); }},
      {"log", {{2, 3}}, true, [](Tape&, auto v) { return log(v[0]); }},
      {"sqrt", {{2, 3}}, true, [](Tape&, auto v) { return sqrt(v[0]); }},
      {"leaky_relu", {{3, 3}}, false, [](Tape&, auto v) { return leaky_relu(v[0], 0.2); }},
      {"sum_rows", {{3, 4}}, false, [](Tape&, auto v) { return sum_rows(v[0]); }},
      {"sum_cols", {{3, 4}}, false, [](Tape&, auto v) { return sum_cols(v[0]); }},
      {"broadcast_rows", {{1, 4}}, false, [](Tape&, auto v) { return broadcast_rows(v[0], 3); }},
      {"broadcast_cols", {{3, 1}}, false, [](Tape&, auto v) { return broadcast_cols(v[0], 2); }},
      {"concat", {{2, 3}, {1, 3}}, false, [](Tape&, auto v) { return concat_rows(v[0], v[1]); }},
      {"slice", {{4, 5}}, false, [](Tape&, auto v) { return slice_cols(slice_rows(v[0], 1, 2), 2, 3); }},
      {"logsumexp", {{3, 4}}, false, [](Tape&, auto v) { return logsumexp_rows(v[0]); }},
      {"softmax", {{3, 4}}, false, [](Tape&, auto v) { return softmax_rows(v[0]); }},
      {"row_norms", {{3, 4}}, true, [](Tape&, auto v) { return row_norms(v[0]); }},
      {"normalize_rows", {{3, 4}}, true, [](Tape&, auto v) { return normalize_rows(v[0]); }},
  };
  Rng rng(2024);
  for (const auto& c : cases) {
    double worst = 0;
    for (int inst = 0; inst < 100; ++inst) {
      std::vector<Tensor> inputs;
      for (auto [r, k] : c.shapes) {
        Tensor t = c.positive ? random_tensor(r, k, rng, 0.5, 2) : random_tensor(r, k, rng);
        if (std::string(c.name) == "leaky_relu") {
          // Keep every entry at least 0.05 away from the kink.
          std::vector<Real> v = t.to_vector();
          for (auto& x : v) x = x >= 0 ? x + 0.05 : x - 0.05;
          t = Tensor(r, k, std::move(v));
        }
        inputs.push_back(t);
      }
      // Random output weights make every output entry matter.
      Tape shape_tape;
      std::vector<Var> vars;
      for (const auto& t : inputs) vars.push_back(shape_tape.variable(t));
      const Tensor out = c.fn(shape_tape, vars).value();
      const Tensor weights = random_tensor(out.rows(), out.cols(), rng);
      const ScalarFn fn = [&](Tape& tape, std::span<const Var> v) {
        return sum(c.fn(tape, v) * tape.constant(weights));
      };
      worst = std::max(worst, finite_diff_check(fn, inputs).max_rel_error);
    }
    EXPECT_LT(worst, 1e-4) << c.name;
  }
}

TEST(Tape, ReplayIsBitIdentical) {
  Rng rng(1);
  Tape tape;
  const Var x = tape.variable(random_tensor(3, 4, rng));
  const Var w = tape.variable(random_tensor(4, 2, rng));
  const Var y = sum(softmax_rows(leaky_relu(matmul(x, w), 0.2)));
  const Tensor before = y.value();
  const auto g1 = tape.gradient_values(y, std::vector<Var>{x, w});
  tape.replay();
  EXPECT_TRUE(y.value().identical(before));
  const auto g2 = tape.gradient_values(y, std::vector<Var>{x, w});
  EXPECT_TRUE(g1[0].identical(g2[0]));
  EXPECT_TRUE(g1[1].identical(g2[1]));
}

TEST(Tape, SecondOrderGradient) {
  // d/dx of (d/dx x^3) = 6x.
  Tape tape;
  const Var x = tape.variable(Tensor::scalar(1.5));
  const Var g = tape.gradient(sum(x * x * x), std::vector<Var>{x})[0];
  EXPECT_NEAR(g.value().item(), 3 * 1.5 * 1.5, 1e-14);
  const Tensor h = tape.gradient_values(sum(g), std::vector<Var>{x})[0];
  EXPECT_NEAR(h.item(), 9, 1e-14);
}

TEST(Tape, NormalizeRowsMapsZeroRowsToZero) {
  Tape tape;
  const Var x = tape.variable(Tensor::from_rows({{0, 0}, {3, 4}}));
  const Tensor y = normalize_rows(x).value();
  EXPECT_EQ(y(0, 0), 0);
  EXPECT_EQ(y(0, 1), 0);
  EXPECT_NEAR(y(1, 0), 0.6, 1e-15);
  const Tensor g = tape.gradient_values(sum(normalize_rows(x)), std::vector<Var>{x})[0];
  EXPECT_TRUE(g.all_finite());
  EXPECT_EQ(g(0, 0), 0);
}

TEST(Tape, NonFiniteLeafRejected) {
  Tape tape;
  EXPECT_THROW(tape.variable(Tensor::scalar(std::nan(""))), NumericError);
}

}  // namespace
}  // namespace rfs
