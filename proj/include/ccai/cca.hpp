// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

/// @file cca.hpp
/// Diagonal-normalized CCA: training, projection into the shared latent
/// space, and the similarity measures used at decoding time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccai/sparse.hpp"
#include "ccai/svd.hpp"

namespace ccai {

using LatentVec = Eigen::VectorXd;

/// Trained projection pair.
///
/// `input_map` has one row per retained input coordinate: row r holds
/// column r of D1^-1/2 U for original coordinate `input_index[r]`. Input
/// coordinates that never fired during training have no row and project to
/// zero. The output side mirrors this with D2^-1/2 V.
class CcaModel {
 public:
  CcaModel() = default;
  CcaModel(std::size_t input_dim, std::size_t output_dim, std::vector<std::size_t> input_index,
           std::vector<std::size_t> output_index, Eigen::MatrixXd input_map,
           Eigen::MatrixXd output_map, Eigen::VectorXd sigma);

  std::size_t m() const { return static_cast<std::size_t>(sigma_.size()); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<std::size_t>& input_index() const { return input_index_; }
  const std::vector<std::size_t>& output_index() const { return output_index_; }
  const Eigen::MatrixXd& input_map() const { return input_map_; }
  const Eigen::MatrixXd& output_map() const { return output_map_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }

  LatentVec project_input(const SparseVec& phi) const;
  LatentVec project_output(const SparseVec& psi) const;

  friend bool operator==(const CcaModel& a, const CcaModel& b);

 private:
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<std::size_t> input_index_;
  std::vector<std::size_t> output_index_;
  std::vector<long long> input_pos_;
  std::vector<long long> output_pos_;
  Eigen::MatrixXd input_map_;
  Eigen::MatrixXd output_map_;
  Eigen::VectorXd sigma_;
};

/// Learns the projection pair from (phi(x), psi(y)) training pairs.
/// Throws InputError for an empty stream or inconsistent dims, and
/// ParameterError when m exceeds the retained dimensions.
CcaModel train(std::span<const VecPair> pairs, std::size_t m, std::uint64_t seed,
               const SvdOptions& svd_options = {});

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const LatentVec& z, const LatentVec& z2);

/// sum_ij d_ij - n * sum_i d_ii^2 with d_ij = sqrt(0.5 * ||u(x_i) - v(y_j)||^2).
/// Diagnostic only; quadratic in the number of pairs.
double cca_objective(const CcaModel& model, std::span<const VecPair> pairs);

// Model file, little-endian:
//   char[8]  "CCAMODEL"
//   u32      version (1)
//   u64      m, input_dim, output_dim, retained_in, retained_out
//   u64[retained_in]   original index of each retained input coordinate
//   u64[retained_out]  original index of each retained output coordinate
//   f64[retained_in * m]   input map, row-major
//   f64[retained_out * m]  output map, row-major
//   f64[m]   singular values
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(std::ostream& out, const CcaModel& model);
CcaModel read_model(std::istream& in);
void save_model(const std::string& path, const CcaModel& model);
CcaModel load_model(const std::string& path);

}  // namespace ccai
