// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/svd.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "ccai/error.hpp"
#include "ccai/rng.hpp"

namespace ccai {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SpMat to_eigen(const SparseMatrix& m) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m.nnz());
  for (const auto& t : m.entries()) {
    triplets.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col), t.value);
  }
  SpMat out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

void fix_signs(ThinSvd& svd) {
  for (Eigen::Index c = 0; c < svd.u.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < svd.u.rows(); ++r) {
      const double a = std::abs(svd.u(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (svd.u(best, c) < 0.0) {
      svd.u.col(c) *= -1.0;
      svd.v.col(c) *= -1.0;
    }
  }
}

ThinSvd dense_svd(const SpMat& matrix, std::size_t m) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(matrix);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto k = static_cast<Eigen::Index>(m);
  return ThinSvd{svd.matrixU().leftCols(k), svd.singularValues().head(k), svd.matrixV().leftCols(k)};
}

ThinSvd randomized_svd(const SpMat& matrix, std::size_t m, std::uint64_t seed,
                       const SvdOptions& options) {
  const Eigen::Index rows = matrix.rows();
  const Eigen::Index cols = matrix.cols();
  const Eigen::Index width = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(m) + options.oversampling, std::min(rows, cols));

  Rng rng(seed);
  Eigen::MatrixXd probe(cols, width);
  for (Eigen::Index j = 0; j < width; ++j) {
    for (Eigen::Index i = 0; i < cols; ++i) probe(i, j) = rng.normal();
  }

  Eigen::MatrixXd q = orthonormal_basis(matrix * probe);
  for (int it = 0; it < options.power_iterations; ++it) {
    const Eigen::MatrixXd z = orthonormal_basis(matrix.transpose() * q);
    q = orthonormal_basis(matrix * z);
  }

  // B = Q^T M is width x cols; its SVD lifts back through Q.
  const Eigen::MatrixXd b = (matrix.transpose() * q).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> small(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto k = static_cast<Eigen::Index>(m);
  return ThinSvd{q * small.matrixU().leftCols(k), small.singularValues().head(k),
                 small.matrixV().leftCols(k)};
}

}  // namespace

double orthonormality_error(const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd gram = q.transpose() * q;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ThinSvd thin_svd(const SparseMatrix& matrix, std::size_t m, std::uint64_t seed,
                 const SvdOptions& options) {
  const std::size_t limit = std::min(matrix.rows(), matrix.cols());
  if (m < 1 || m > limit) {
    throw ParameterError("thin_svd: m = " + std::to_string(m) + " outside [1, " +
                         std::to_string(limit) + "]");
  }
  for (const auto& t : matrix.entries()) {
    if (!std::isfinite(t.value)) throw InputError("thin_svd: non-finite matrix entry");
  }

  const SpMat sp = to_eigen(matrix);
  ThinSvd out = limit <= options.dense_threshold ? dense_svd(sp, m)
                                                 : randomized_svd(sp, m, seed, options);
  fix_signs(out);

  assert(orthonormality_error(out.u) <= 1e-8);
  assert(orthonormality_error(out.v) <= 1e-8);
#ifndef NDEBUG
  for (Eigen::Index i = 1; i < out.sigma.size(); ++i) assert(out.sigma(i) <= out.sigma(i - 1));
#endif
  return out;
}

}  // namespace ccai
