// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used only by tests. Nothing here calls
// into the library's numerical code paths.

#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ccai/caption.hpp"

namespace ccai::oracle {

/// Row-major dense matrix.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Dense() = default;
  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

Dense transpose(const Dense& m);
Dense multiply(const Dense& x, const Dense& y);

struct DenseSvd {
  std::vector<double> sigma;  // descending
  Dense u;                    // rows x k
  Dense v;                    // cols x k
};

/// One-sided (Hestenes) Jacobi SVD.
DenseSvd jacobi_svd(const Dense& m);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvectors are
/// the columns of `vectors`.
void jacobi_eigen(const Dense& sym, std::vector<double>& values, Dense& vectors);

/// S^-1/2 for a symmetric positive definite S.
Dense inverse_sqrt(const Dense& sym);

/// Leading canonical correlation of the uncentered second moments of
/// paired samples (full within-view matrices, no diagonal approximation).
double dense_cca_top(const std::vector<std::vector<double>>& x,
                     const std::vector<std::vector<double>>& y);

/// Every contiguous n-gram (1..max_len) of every caption.
std::set<std::vector<std::string>> enumerate_ngrams(const std::vector<Caption>& corpus,
                                                    std::size_t max_len);

/// Upper-tail probability of the chi-square distribution.
double chi_square_sf(double x, double dof);

}  // namespace ccai::oracle
