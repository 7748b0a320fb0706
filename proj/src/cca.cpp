// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/cca.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ccai/error.hpp"

namespace ccai {

namespace {

std::vector<long long> positions(std::size_t dim, const std::vector<std::size_t>& index) {
  std::vector<long long> pos(dim, -1);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= dim) throw InputError("retained index out of range");
    pos[index[r]] = static_cast<long long>(r);
  }
  return pos;
}

LatentVec project(const SparseVec& v, std::size_t dim, const std::vector<long long>& pos,
                  const Eigen::MatrixXd& map, const char* side) {
  if (v.dim() != dim) {
    throw InputError(std::string(side) + " vector has dim " + std::to_string(v.dim()) +
                     ", model expects " + std::to_string(dim));
  }
  LatentVec z = LatentVec::Zero(map.cols());
  for (const auto& e : v.entries()) {
    const long long r = pos[e.index];
    if (r >= 0) z += e.value * map.row(r).transpose();
  }
  return z;
}

}  // namespace

CcaModel::CcaModel(std::size_t input_dim, std::size_t output_dim,
                   std::vector<std::size_t> input_index, std::vector<std::size_t> output_index,
                   Eigen::MatrixXd input_map, Eigen::MatrixXd output_map, Eigen::VectorXd sigma)
    : input_dim_(input_dim),
      output_dim_(output_dim),
      input_index_(std::move(input_index)),
      output_index_(std::move(output_index)),
      input_map_(std::move(input_map)),
      output_map_(std::move(output_map)),
      sigma_(std::move(sigma)) {
  if (input_map_.rows() != static_cast<Eigen::Index>(input_index_.size()) ||
      output_map_.rows() != static_cast<Eigen::Index>(output_index_.size()) ||
      input_map_.cols() != sigma_.size() || output_map_.cols() != sigma_.size()) {
    throw InputError("inconsistent CCA model shapes");
  }
  if (!input_map_.allFinite() || !output_map_.allFinite() || !sigma_.allFinite()) {
    throw InputError("CCA model contains non-finite values");
  }
  input_pos_ = positions(input_dim_, input_index_);
  output_pos_ = positions(output_dim_, output_index_);
}

LatentVec CcaModel::project_input(const SparseVec& phi) const {
  return project(phi, input_dim_, input_pos_, input_map_, "input");
}

LatentVec CcaModel::project_output(const SparseVec& psi) const {
  return project(psi, output_dim_, output_pos_, output_map_, "output");
}

bool operator==(const CcaModel& a, const CcaModel& b) {
  return a.input_dim_ == b.input_dim_ && a.output_dim_ == b.output_dim_ &&
         a.input_index_ == b.input_index_ && a.output_index_ == b.output_index_ &&
         a.input_map_.rows() == b.input_map_.rows() && a.input_map_.cols() == b.input_map_.cols() &&
         a.output_map_.rows() == b.output_map_.rows() &&
         a.output_map_.cols() == b.output_map_.cols() && a.sigma_.size() == b.sigma_.size() &&
         a.input_map_ == b.input_map_ && a.output_map_ == b.output_map_ && a.sigma_ == b.sigma_;
}

CcaModel train(std::span<const VecPair> pairs, std::size_t m, std::uint64_t seed,
               const SvdOptions& svd_options) {
  if (pairs.empty()) throw InputError("train: empty training stream");
  const std::size_t d = pairs.front().first.dim();
  const std::size_t d2 = pairs.front().second.dim();

  DiagAccumulator in_moment(d);
  DiagAccumulator out_moment(d2);
  CrossCovarianceAccumulator cross(d, d2);
  for (const auto& [phi, psi] : pairs) {
    in_moment.add(phi);
    out_moment.add(psi);
    cross.add(phi, psi);
  }
  const DiagMatrix d1 = in_moment.result();
  const DiagMatrix dd2 = out_moment.result();
  const ScaledMatrix scaled = scale_by_diag(cross.result(), d1, dd2);

  const std::size_t kept_in = scaled.row_index.size();
  const std::size_t kept_out = scaled.col_index.size();
  if (m < 1 || m > std::min(kept_in, kept_out)) {
    throw ParameterError("train: m = " + std::to_string(m) + " but only " +
                         std::to_string(kept_in) + " input and " + std::to_string(kept_out) +
                         " output coordinates are retained");
  }

  ThinSvd svd = thin_svd(scaled.matrix, m, seed, svd_options);
  for (std::size_t r = 0; r < kept_in; ++r) {
    svd.u.row(static_cast<Eigen::Index>(r)) /= std::sqrt(d1.diag[scaled.row_index[r]]);
  }
  for (std::size_t r = 0; r < kept_out; ++r) {
    svd.v.row(static_cast<Eigen::Index>(r)) /= std::sqrt(dd2.diag[scaled.col_index[r]]);
  }
  return CcaModel(d, d2, scaled.row_index, scaled.col_index, std::move(svd.u), std::move(svd.v),
                  std::move(svd.sigma));
}

double cosine(const LatentVec& z, const LatentVec& z2) {
  const double nz = z.norm();
  const double nz2 = z2.norm();
  if (nz == 0.0 || nz2 == 0.0) return 0.0;
  return std::clamp(z.dot(z2) / (nz * nz2), -1.0, 1.0);
}

double cca_objective(const CcaModel& model, std::span<const VecPair> pairs) {
  const std::size_t n = pairs.size();
  std::vector<LatentVec> u;
  std::vector<LatentVec> v;
  u.reserve(n);
  v.reserve(n);
  for (const auto& [phi, psi] : pairs) {
    u.push_back(model.project_input(phi));
    v.push_back(model.project_output(psi));
  }
  double cross_sum = 0.0;
  double diag_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sq = 0.5 * (u[i] - v[j]).squaredNorm();
      cross_sum += std::sqrt(sq);
      if (i == j) diag_sq += sq;
    }
  }
  return cross_sum - static_cast<double>(n) * diag_sq;
}

// ---- serialization ----

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'C', 'A', 'M', 'O', 'D', 'E', 'L'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw InputError("model file truncated");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
  }
}

Eigen::MatrixXd get_matrix(std::istream& in, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
  }
  return m;
}

}  // namespace

void write_model(std::ostream& out, const CcaModel& model) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint64_t>(out, model.m());
  put<std::uint64_t>(out, model.input_dim());
  put<std::uint64_t>(out, model.output_dim());
  put<std::uint64_t>(out, model.input_index().size());
  put<std::uint64_t>(out, model.output_index().size());
  for (auto i : model.input_index()) put<std::uint64_t>(out, i);
  for (auto i : model.output_index()) put<std::uint64_t>(out, i);
  put_matrix(out, model.input_map());
  put_matrix(out, model.output_map());
  for (Eigen::Index i = 0; i < model.sigma().size(); ++i) put<double>(out, model.sigma()(i));
}

CcaModel read_model(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw InputError("not a CCA model file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw InputError("unsupported model format version " + std::to_string(version));
  }
  const auto m = get<std::uint64_t>(in);
  const auto d = get<std::uint64_t>(in);
  const auto d2 = get<std::uint64_t>(in);
  const auto kept_in = get<std::uint64_t>(in);
  const auto kept_out = get<std::uint64_t>(in);
  if (kept_in > d || kept_out > d2 || m > std::min(kept_in, kept_out)) {
    throw InputError("model header is inconsistent");
  }
  std::vector<std::size_t> in_index(kept_in);
  std::vector<std::size_t> out_index(kept_out);
  for (auto& i : in_index) i = get<std::uint64_t>(in);
  for (auto& i : out_index) i = get<std::uint64_t>(in);
  Eigen::MatrixXd a = get_matrix(in, kept_in, m);
  Eigen::MatrixXd b = get_matrix(in, kept_out, m);
  Eigen::VectorXd sigma(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < sigma.size(); ++i) sigma(i) = get<double>(in);
  return CcaModel(d, d2, std::move(in_index), std::move(out_index), std::move(a), std::move(b),
                  std::move(sigma));
}

void save_model(const std::string& path, const CcaModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_model(out, model);
  if (!out) throw IoError("failed writing " + path);
}

CcaModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_model(in);
}

}  // namespace ccai
