// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

/// @file sparse.hpp
/// Sparse feature vectors and the second-moment accumulators used to build
/// the normalized cross-covariance matrix for CCA training.
///
/// Accumulators keep raw sums over the training stream with no 1/n factor:
/// the factors cancel in D1^-1/2 * Omega * D2^-1/2, which is the only place
/// the sums are consumed.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ccai {

struct SparseEntry {
  std::size_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse vector with an explicit dimension. Indices are strictly increasing,
/// no stored zeros, all values finite.
class SparseVec {
 public:
  SparseVec() = default;
  explicit SparseVec(std::size_t dim) : dim_(dim) {}

  /// Builds a vector from unordered entries. Zero values are dropped.
  /// Throws InputError on out-of-range or duplicate indices and non-finite values.
  static SparseVec from_entries(std::size_t dim, std::vector<SparseEntry> entries);
  static SparseVec from_dense(std::span<const double> values);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const SparseEntry> entries() const { return entries_; }

  std::vector<double> to_dense() const;

  friend bool operator==(const SparseVec&, const SparseVec&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<SparseEntry> entries_;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Coordinate-list matrix; entries sorted by (row, col) and unique.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  /// Sums duplicate coordinates, drops exact zeros, sorts.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const Triplet> entries() const { return entries_; }

  /// Value at (i, j); zero when absent. Binary search.
  double at(std::size_t i, std::size_t j) const;

  /// Row-major dense copy, for tests and small problems.
  std::vector<double> to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Triplet> entries_;
};

struct DiagMatrix {
  std::vector<double> diag;

  std::size_t dim() const { return diag.size(); }
};

/// Running sum of squared coordinates over a stream of vectors.
/// Partial accumulators merge by addition.
class DiagAccumulator {
 public:
  explicit DiagAccumulator(std::size_t dim) : sums_(dim, 0.0) {}

  void add(const SparseVec& v);
  void merge(const DiagAccumulator& other);
  std::size_t count() const { return count_; }
  DiagMatrix result() const { return DiagMatrix{sums_}; }

 private:
  std::vector<double> sums_;
  std::size_t count_ = 0;
};

/// Running sum of outer products phi * psi^T over a stream of pairs.
class CrossCovarianceAccumulator {
 public:
  CrossCovarianceAccumulator(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void add(const SparseVec& phi, const SparseVec& psi);
  void merge(const CrossCovarianceAccumulator& other);
  std::size_t count() const { return count_; }
  SparseMatrix result() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t count_ = 0;
  std::unordered_map<std::uint64_t, double> sums_;
};

using VecPair = std::pair<SparseVec, SparseVec>;

DiagMatrix accumulate_diag_second_moment(std::span<const SparseVec> vectors, std::size_t dim);

/// Omega; dimensions are taken from the first pair. An empty stream yields a
/// 0x0 matrix.
SparseMatrix accumulate_cross_covariance(std::span<const VecPair> pairs);

/// D1^-1/2 * Omega * D2^-1/2 restricted to coordinates with a nonzero
/// diagonal. `row_index[r]` / `col_index[c]` give the original coordinate of
/// compacted row r / column c.
struct ScaledMatrix {
  SparseMatrix matrix;
  std::vector<std::size_t> row_index;
  std::vector<std::size_t> col_index;
};

ScaledMatrix scale_by_diag(const SparseMatrix& omega, const DiagMatrix& d1, const DiagMatrix& d2);

/// Inverse of scale_by_diag, back in the original coordinates.
SparseMatrix unscale_by_diag(const ScaledMatrix& scaled, const DiagMatrix& d1,
                             const DiagMatrix& d2, std::size_t rows, std::size_t cols);

}  // namespace ccai
