// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "ccai/sparse.hpp"

namespace ccai {

/// Top-m singular triplets. Columns of `u` and `v` are orthonormal and
/// `sigma` is non-increasing. For each column the largest-magnitude entry of
/// `u` is nonnegative (ties go to the lowest row), and `v` is flipped to match.
struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
};

struct SvdOptions {
  int power_iterations = 4;
  int oversampling = 10;
  /// Matrices with min(rows, cols) at or below this use a dense SVD.
  std::size_t dense_threshold = 200;
};

/// Thin SVD of a sparse matrix, deterministic for a given seed.
///
/// Small problems go through a dense bidiagonal SVD. Larger ones use a
/// randomized range finder with power iterations, touching the matrix only
/// through products with dense blocks.
ThinSvd thin_svd(const SparseMatrix& matrix, std::size_t m, std::uint64_t seed,
                 const SvdOptions& options = {});

/// Max-norm deviation of Q^T Q from the identity.
double orthonormality_error(const Eigen::MatrixXd& q);

}  // namespace ccai
