// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "ccai/error.hpp"
#include "ccai/rng.hpp"
#include "ccai/sparse.hpp"

using namespace ccai;

namespace {

SparseVec random_sparse(Rng& rng, std::size_t dim, double density) {
  std::vector<SparseEntry> e;
  for (std::size_t i = 0; i < dim; ++i) {
    if (rng.uniform() < density) e.push_back({i, rng.uniform() * 4.0 - 1.0});
  }
  return SparseVec::from_entries(dim, std::move(e));
}

}  // namespace

TEST_CASE("SparseVec validates and normalizes entries") {
  const auto v = SparseVec::from_entries(10, {{5, 2.0}, {0, 1.0}, {3, 0.0}});
  REQUIRE(v.nnz() == 2);
  CHECK(v.entries()[0] == SparseEntry{0, 1.0});
  CHECK(v.entries()[1] == SparseEntry{5, 2.0});
  CHECK_THROWS_AS(SparseVec::from_entries(3, {{3, 1.0}}), InputError);
  CHECK_THROWS_AS(SparseVec::from_entries(3, {{1, 1.0}, {1, 2.0}}), InputError);
  CHECK_THROWS_AS(SparseVec::from_entries(3, {{1, std::nan("")}}), InputError);
}

TEST_CASE("diagonal second moment") {
  SUBCASE("sum of squares") {
    const std::vector<SparseVec> vs = {SparseVec::from_dense(std::vector{1.0, 0.0}),
                                       SparseVec::from_dense(std::vector{0.0, 2.0})};
    CHECK(accumulate_diag_second_moment(vs, 2).diag == std::vector{1.0, 4.0});
  }
  SUBCASE("empty stream") {
    CHECK(accumulate_diag_second_moment({}, 3).diag == std::vector{0.0, 0.0, 0.0});
  }
  SUBCASE("dimension mismatch names the offending vector") {
    const std::vector<SparseVec> vs = {SparseVec(4), SparseVec(4), SparseVec(5)};
    try {
      accumulate_diag_second_moment(vs, 4);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("vector 2") != std::string::npos);
    }
  }
  SUBCASE("matches dense accumulation on random vectors") {
    Rng rng(11);
    std::vector<SparseVec> vs;
    for (int k = 0; k < 100; ++k) vs.push_back(random_sparse(rng, 30, 0.2));
    std::vector<double> oracle(30, 0.0);
    for (const auto& v : vs) {
      const auto d = v.to_dense();
      for (std::size_t i = 0; i < d.size(); ++i) oracle[i] += d[i] * d[i];
    }
    const auto got = accumulate_diag_second_moment(vs, 30).diag;
    for (std::size_t i = 0; i < 30; ++i) CHECK(got[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
}

TEST_CASE("cross covariance") {
  SUBCASE("single outer product") {
    const std::vector<VecPair> pairs = {{SparseVec::from_dense(std::vector{1.0, 0.0}),
                                         SparseVec::from_dense(std::vector{0.0, 3.0})}};
    const auto omega = accumulate_cross_covariance(pairs);
    REQUIRE(omega.nnz() == 1);
    CHECK(omega.entries()[0] == Triplet{0, 1, 3.0});
  }
  SUBCASE("two identical pairs double the matrix") {
    Rng rng(3);
    const VecPair p{random_sparse(rng, 8, 0.5), random_sparse(rng, 6, 0.5)};
    const std::vector<VecPair> one = {p};
    const std::vector<VecPair> two = {p, p};
    const auto a = accumulate_cross_covariance(one);
    const auto b = accumulate_cross_covariance(two);
    REQUIRE(a.nnz() == b.nnz());
    for (std::size_t k = 0; k < a.nnz(); ++k) CHECK(b.entries()[k].value == 2.0 * a.entries()[k].value);
  }
  SUBCASE("matches dense outer-product sum; nnz bound holds") {
    Rng rng(5);
    std::vector<VecPair> pairs;
    std::size_t bound = 0;
    for (int k = 0; k < 50; ++k) {
      pairs.emplace_back(random_sparse(rng, 12, 0.3), random_sparse(rng, 9, 0.3));
      bound += pairs.back().first.nnz() * pairs.back().second.nnz();
    }
    std::vector<double> oracle(12 * 9, 0.0);
    for (const auto& [x, y] : pairs) {
      const auto dx = x.to_dense();
      const auto dy = y.to_dense();
      for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 9; ++j) oracle[i * 9 + j] += dx[i] * dy[j];
    }
    const auto omega = accumulate_cross_covariance(pairs);
    CHECK(omega.nnz() <= bound);
    const auto dense = omega.to_dense();
    for (std::size_t k = 0; k < dense.size(); ++k) CHECK(std::abs(dense[k] - oracle[k]) <= 1e-12);
  }
  SUBCASE("inconsistent dims are rejected") {
    const std::vector<VecPair> pairs = {{SparseVec(3), SparseVec(2)}, {SparseVec(3), SparseVec(4)}};
    CHECK_THROWS_AS(accumulate_cross_covariance(pairs), InputError);
  }
}

TEST_CASE("accumulators are order independent and mergeable") {
  Rng rng(17);
  std::vector<VecPair> pairs;
  for (int k = 0; k < 200; ++k) pairs.emplace_back(random_sparse(rng, 20, 0.3), random_sparse(rng, 15, 0.3));
  auto shuffled = pairs;
  for (std::size_t k = shuffled.size() - 1; k > 0; --k) std::swap(shuffled[k], shuffled[rng.below(k + 1)]);

  const auto a = accumulate_cross_covariance(pairs).to_dense();
  const auto b = accumulate_cross_covariance(shuffled).to_dense();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-10);

  CrossCovarianceAccumulator left(20, 15), right(20, 15);
  DiagAccumulator dl(20), dr(20);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    (k % 2 ? left : right).add(pairs[k].first, pairs[k].second);
    (k % 2 ? dl : dr).add(pairs[k].first);
  }
  left.merge(right);
  dl.merge(dr);
  CHECK(left.count() == pairs.size());
  const auto merged = left.result().to_dense();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - merged[k]) <= 1e-10);

  std::vector<SparseVec> xs;
  for (const auto& p : pairs) xs.push_back(p.first);
  const auto diag = accumulate_diag_second_moment(xs, 20).diag;
  for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(diag[i] - dl.result().diag[i]) <= 1e-10);
}

TEST_CASE("scale_by_diag") {
  SUBCASE("single entry") {
    const auto omega = SparseMatrix::from_triplets(1, 1, {{0, 0, 4.0}});
    const auto s = scale_by_diag(omega, DiagMatrix{{4.0}}, DiagMatrix{{1.0}});
    REQUIRE(s.matrix.nnz() == 1);
    CHECK(s.matrix.entries()[0].value == 2.0);
  }
  SUBCASE("zero diagonal drops the column and records the kept indices") {
    const auto omega = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}, {1, 2, 2.0}});
    const auto s = scale_by_diag(omega, DiagMatrix{{1.0, 4.0}}, DiagMatrix{{1.0, 0.0, 1.0}});
    CHECK(s.matrix.rows() == 2);
    CHECK(s.matrix.cols() == 2);
    CHECK(s.col_index == std::vector<std::size_t>{0, 2});
    CHECK(s.row_index == std::vector<std::size_t>{0, 1});
    CHECK(s.matrix.at(1, 1) == doctest::Approx(1.0));
  }
  SUBCASE("random case matches dense oracle and unscale round-trips") {
    Rng rng(23);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 15; ++j)
        if (rng.uniform() < 0.4) t.push_back({i, j, rng.uniform() - 0.5});
    const auto omega = SparseMatrix::from_triplets(20, 15, t);
    DiagMatrix d1, d2;
    for (int i = 0; i < 20; ++i) d1.diag.push_back(i == 7 ? 0.0 : 0.1 + rng.uniform());
    for (int j = 0; j < 15; ++j) d2.diag.push_back(0.1 + rng.uniform());
    const auto s = scale_by_diag(omega, d1, d2);
    CHECK(s.matrix.rows() == 19);
    for (std::size_t r = 0; r < s.row_index.size(); ++r) {
      for (std::size_t c = 0; c < s.col_index.size(); ++c) {
        const std::size_t i = s.row_index[r], j = s.col_index[c];
        const double oracle = omega.at(i, j) / std::sqrt(d1.diag[i] * d2.diag[j]);
        CHECK(std::abs(s.matrix.at(r, c) - oracle) <= 1e-12);
      }
    }
    const auto back = unscale_by_diag(s, d1, d2, 20, 15);
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = 0; j < 15; ++j) {
        const double expected = i == 7 ? 0.0 : omega.at(i, j);
        CHECK(std::abs(back.at(i, j) - expected) <= 1e-12);
      }
    }
  }
}
