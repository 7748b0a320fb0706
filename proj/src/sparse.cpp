// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccai/error.hpp"

namespace ccai {

SparseVec SparseVec::from_entries(std::size_t dim, std::vector<SparseEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  SparseVec v(dim);
  v.entries_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (e.index >= dim) {
      throw InputError("feature index " + std::to_string(e.index) + " out of range for dim " +
                       std::to_string(dim));
    }
    if (!std::isfinite(e.value)) {
      throw InputError("non-finite value at index " + std::to_string(e.index));
    }
    if (k > 0 && entries[k - 1].index == e.index) {
      throw InputError("duplicate feature index " + std::to_string(e.index));
    }
    if (e.value != 0.0) v.entries_.push_back(e);
  }
  return v;
}

SparseVec SparseVec::from_dense(std::span<const double> values) {
  std::vector<SparseEntry> entries;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) entries.push_back({i, values[i]});
  }
  return from_entries(values.size(), std::move(entries));
}

std::vector<double> SparseVec::to_dense() const {
  std::vector<double> out(dim_, 0.0);
  for (const auto& e : entries_) out[e.index] = e.value;
  return out;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw InputError("matrix coordinate (" + std::to_string(t.row) + ", " +
                       std::to_string(t.col) + ") out of range");
    }
    if (!std::isfinite(t.value)) throw InputError("non-finite matrix entry");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  for (const auto& t : triplets) {
    if (!m.entries_.empty() && m.entries_.back().row == t.row && m.entries_.back().col == t.col) {
      m.entries_.back().value += t.value;
    } else {
      m.entries_.push_back(t);
    }
  }
  std::erase_if(m.entries_, [](const Triplet& t) { return t.value == 0.0; });
  return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{i, j},
                             [](const Triplet& t, const std::pair<std::size_t, std::size_t>& key) {
                               return t.row != key.first ? t.row < key.first : t.col < key.second;
                             });
  if (it != entries_.end() && it->row == i && it->col == j) return it->value;
  return 0.0;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> out(rows_ * cols_, 0.0);
  for (const auto& t : entries_) out[t.row * cols_ + t.col] = t.value;
  return out;
}

void DiagAccumulator::add(const SparseVec& v) {
  if (v.dim() != sums_.size()) {
    throw InputError("vector " + std::to_string(count_) + " has dim " + std::to_string(v.dim()) +
                     ", expected " + std::to_string(sums_.size()));
  }
  for (const auto& e : v.entries()) sums_[e.index] += e.value * e.value;
  ++count_;
}

void DiagAccumulator::merge(const DiagAccumulator& other) {
  if (other.sums_.size() != sums_.size()) throw InputError("cannot merge accumulators of different dim");
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
  count_ += other.count_;
}

void CrossCovarianceAccumulator::add(const SparseVec& phi, const SparseVec& psi) {
  if (phi.dim() != rows_ || psi.dim() != cols_) {
    throw InputError("pair " + std::to_string(count_) + " has dims (" + std::to_string(phi.dim()) +
                     ", " + std::to_string(psi.dim()) + "), expected (" + std::to_string(rows_) +
                     ", " + std::to_string(cols_) + ")");
  }
  for (const auto& a : phi.entries()) {
    const std::uint64_t base = static_cast<std::uint64_t>(a.index) * cols_;
    for (const auto& b : psi.entries()) sums_[base + b.index] += a.value * b.value;
  }
  ++count_;
}

void CrossCovarianceAccumulator::merge(const CrossCovarianceAccumulator& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw InputError("cannot merge accumulators of different shape");
  }
  for (const auto& [key, value] : other.sums_) sums_[key] += value;
  count_ += other.count_;
}

SparseMatrix CrossCovarianceAccumulator::result() const {
  std::vector<Triplet> triplets;
  triplets.reserve(sums_.size());
  for (const auto& [key, value] : sums_) {
    triplets.push_back({static_cast<std::size_t>(key / cols_), static_cast<std::size_t>(key % cols_), value});
  }
  return SparseMatrix::from_triplets(rows_, cols_, std::move(triplets));
}

DiagMatrix accumulate_diag_second_moment(std::span<const SparseVec> vectors, std::size_t dim) {
  DiagAccumulator acc(dim);
  for (const auto& v : vectors) acc.add(v);
  return acc.result();
}

SparseMatrix accumulate_cross_covariance(std::span<const VecPair> pairs) {
  if (pairs.empty()) return SparseMatrix{};
  CrossCovarianceAccumulator acc(pairs.front().first.dim(), pairs.front().second.dim());
  for (const auto& [phi, psi] : pairs) acc.add(phi, psi);
  return acc.result();
}

namespace {

// Maps original coordinates to compacted ones; -1 marks a dropped coordinate.
std::vector<long long> compact(const DiagMatrix& d, std::vector<std::size_t>& kept) {
  std::vector<long long> pos(d.dim(), -1);
  for (std::size_t i = 0; i < d.dim(); ++i) {
    if (d.diag[i] > 0.0) {
      pos[i] = static_cast<long long>(kept.size());
      kept.push_back(i);
    }
  }
  return pos;
}

}  // namespace

ScaledMatrix scale_by_diag(const SparseMatrix& omega, const DiagMatrix& d1, const DiagMatrix& d2) {
  if (d1.dim() != omega.rows() || d2.dim() != omega.cols()) {
    throw InputError("diagonal dims do not match the cross-covariance shape");
  }
  ScaledMatrix out;
  const auto row_pos = compact(d1, out.row_index);
  const auto col_pos = compact(d2, out.col_index);
  std::vector<Triplet> triplets;
  triplets.reserve(omega.nnz());
  for (const auto& t : omega.entries()) {
    if (row_pos[t.row] < 0 || col_pos[t.col] < 0) continue;
    triplets.push_back({static_cast<std::size_t>(row_pos[t.row]),
                        static_cast<std::size_t>(col_pos[t.col]),
                        t.value / (std::sqrt(d1.diag[t.row]) * std::sqrt(d2.diag[t.col]))});
  }
  out.matrix = SparseMatrix::from_triplets(out.row_index.size(), out.col_index.size(),
                                           std::move(triplets));
  return out;
}

SparseMatrix unscale_by_diag(const ScaledMatrix& scaled, const DiagMatrix& d1,
                             const DiagMatrix& d2, std::size_t rows, std::size_t cols) {
  std::vector<Triplet> triplets;
  triplets.reserve(scaled.matrix.nnz());
  for (const auto& t : scaled.matrix.entries()) {
    const std::size_t i = scaled.row_index[t.row];
    const std::size_t j = scaled.col_index[t.col];
    triplets.push_back({i, j, t.value * std::sqrt(d1.diag[i]) * std::sqrt(d2.diag[j])});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

}  // namespace ccai
