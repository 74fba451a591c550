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

#include "rfs/projection.hpp"

#include <Eigen/Dense>

#include "rfs/errors.hpp"

namespace rfs {

double Pca::explained_ratio() const {
  double total = 0, kept = 0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    total += eigenvalues[i];
    if (i < components.cols()) kept += eigenvalues[i];
  }
  return total > 0 ? kept / total : 0.0;
}

Pca fit_pca(const Tensor& x, std::size_t k) {
  if (x.rows() < 2) throw ContractError("fit_pca: needs at least two rows");
  if (k < 1 || k > x.cols()) throw ContractError("fit_pca: k must lie in [1, D]");
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = static_cast<double>(x(i, j));
  }
  const Eigen::RowVectorXd mu = m.colwise().mean();
  m.rowwise() -= mu;
  const Eigen::MatrixXd cov = (m.transpose() * m) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("fit_pca: eigendecomposition failed");

  Pca out;
  std::vector<Real> mean(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) mean[j] = static_cast<Real>(mu(j));
  out.mean = Tensor::row(std::move(mean));
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index j = d - 1; j >= 0; --j) out.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(j)));
  std::vector<Real> comp(static_cast<std::size_t>(d) * k);
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - static_cast<Eigen::Index>(c));
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (Eigen::Index j = 0; j < d; ++j) comp[static_cast<std::size_t>(j) * k + c] = static_cast<Real>(v(j));
  }
  out.components = Tensor(static_cast<std::size_t>(d), k, std::move(comp));
  return out;
}

Tensor project(const Pca& pca, const Tensor& x) {
  if (x.cols() != pca.mean.cols()) throw DimensionError("project: feature dimension mismatch");
  std::vector<Real> centered(x.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) centered[i * x.cols() + j] = x(i, j) - pca.mean[j];
  }
  return kernels::matmul(Tensor(x.rows(), x.cols(), std::move(centered)), pca.components);
}

}  // namespace rfs
