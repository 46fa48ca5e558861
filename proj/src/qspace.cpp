// Copyright 2026 The cqed-thermometry Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cqed/qspace.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "cqed/errors.hpp"

namespace cqed {

namespace {

using Triplet = Eigen::Triplet<cplx>;

SparseMat pruned(SparseMat m) {
  m.prune(cplx(0.0, 0.0));
  m.makeCompressed();
  return m;
}

void require_same_dims(const Operator& a, const Operator& b) {
  if (!(a.dims() == b.dims())) throw DimensionError("operator dimensions differ");
}

}  // namespace

SpaceDims::SpaceDims(int n_cavity, int n_transmon) : n_cavity_(n_cavity), n_transmon_(n_transmon) {
  if (n_cavity < 2 || n_transmon < 2) {
    throw DimensionError("space dims need n_cavity >= 2 and n_transmon >= 2, got (" +
                         std::to_string(n_cavity) + ", " + std::to_string(n_transmon) + ")");
  }
  if (n_transmon > kMaxTransmonLevels) {
    throw DimensionError("n_transmon = " + std::to_string(n_transmon) + " exceeds " +
                         std::to_string(kMaxTransmonLevels));
  }
}

Operator::Operator(SpaceDims dims, SparseMat m, Unit unit)
    : dims_(dims), m_(pruned(std::move(m))), unit_(unit) {
  if (m_.rows() != dims_.total() || m_.cols() != dims_.total()) {
    throw DimensionError("operator is " + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()) +
                         ", space dimension is " + std::to_string(dims_.total()));
  }
}

Operator Operator::adjoint() const { return Operator(dims_, SparseMat(m_.adjoint()), unit_); }

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dims(a, b);
  const Unit u = (a.unit_ == Unit::angular_frequency || b.unit_ == Unit::angular_frequency)
                     ? Unit::angular_frequency
                     : Unit::dimensionless;
  return Operator(a.dims_, SparseMat(a.m_ * b.m_), u);
}

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dims(a, b);
  if (a.unit_ != b.unit_) throw DimensionError("cannot add operators with different units");
  return Operator(a.dims_, SparseMat(a.m_ + b.m_), a.unit_);
}

Operator operator*(cplx s, const Operator& a) { return Operator(a.dims_, SparseMat(s * a.m_), a.unit_); }

DensityMatrix::DensityMatrix(SpaceDims dims, DenseMat rho) : dims_(dims), rho_(std::move(rho)) {
  if (rho_.rows() != dims_.total() || rho_.cols() != dims_.total()) {
    throw DimensionError("density matrix shape does not match space dimension");
  }
}

DensityMatrix DensityMatrix::basis_state(SpaceDims dims, int idx) {
  if (idx < 0 || idx >= dims.total()) throw DimensionError("basis index out of range");
  DenseMat rho = DenseMat::Zero(dims.total(), dims.total());
  rho(idx, idx) = 1.0;
  return DensityMatrix(dims, std::move(rho));
}

DensityMatrix DensityMatrix::product(SpaceDims dims, const DenseMat& cavity, const DenseMat& transmon) {
  if (cavity.rows() != dims.n_cavity() || transmon.rows() != dims.n_transmon()) {
    throw DimensionError("factor states do not match space dims");
  }
  const int nt = dims.n_transmon();
  DenseMat rho(dims.total(), dims.total());
  for (int n = 0; n < dims.n_cavity(); ++n)
    for (int m = 0; m < dims.n_cavity(); ++m)
      rho.block(n * nt, m * nt, nt, nt) = cavity(n, m) * transmon;
  return DensityMatrix(dims, std::move(rho));
}

cplx DensityMatrix::expect(const Operator& op) const {
  if (!(op.dims() == dims_)) throw DimensionError("operator/state dimensions differ");
  // Tr(A rho) = sum_{ij} A_ij rho_ji
  cplx acc = 0.0;
  const SparseMat& a = op.matrix();
  for (int j = 0; j < a.outerSize(); ++j)
    for (SparseMat::InnerIterator it(a, j); it; ++it) acc += it.value() * rho_(j, it.row());
  return acc;
}

StateCheck DensityMatrix::check() const {
  StateCheck c;
  const double norm = rho_.norm();
  c.hermiticity = norm > 0.0 ? (rho_ - rho_.adjoint()).norm() / norm : 0.0;
  c.trace_error = std::abs(rho_.trace() - cplx(1.0, 0.0));
  const DenseMat herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMat> es(herm, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

DenseVec DensityMatrix::vec() const { return Eigen::Map<const DenseVec>(rho_.data(), rho_.size()); }

DensityMatrix DensityMatrix::from_vec(SpaceDims dims, const DenseVec& v) {
  const int d = dims.total();
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw DimensionError("vectorized state has wrong length");
  return DensityMatrix(dims, Eigen::Map<const DenseMat>(v.data(), d, d));
}

SparseMat kron(const SparseMat& a, const SparseMat& b) {
  SparseMat out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(a.nonZeros() * b.nonZeros()));
  for (int ja = 0; ja < a.outerSize(); ++ja)
    for (SparseMat::InnerIterator ia(a, ja); ia; ++ia)
      for (int jb = 0; jb < b.outerSize(); ++jb)
        for (SparseMat::InnerIterator ib(b, jb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ja * b.cols() + jb, ia.value() * ib.value());
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

SparseMat sparse_identity(int n) {
  SparseMat id(n, n);
  id.setIdentity();
  return id;
}

Operator tensor_embed(const SparseMat& cav_op, const SparseMat& transmon_op, SpaceDims dims) {
  if (cav_op.rows() != dims.n_cavity() || cav_op.cols() != dims.n_cavity() ||
      transmon_op.rows() != dims.n_transmon() || transmon_op.cols() != dims.n_transmon()) {
    throw DimensionError("tensor_embed: factor dimensions do not match space dims");
  }
  return Operator(dims, kron(cav_op, transmon_op));
}

Operator annihilation(SpaceDims dims) {
  const int nc = dims.n_cavity();
  SparseMat a(nc, nc);
  std::vector<Triplet> t;
  for (int n = 1; n < nc; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(t.begin(), t.end());
  return tensor_embed(a, sparse_identity(dims.n_transmon()), dims);
}

Operator transmon_lowering(SpaceDims dims, std::span<const double> ratios) {
  const int nt = dims.n_transmon();
  if (static_cast<int>(ratios.size()) != nt - 1) {
    throw ConfigError("coupling ratio list has " + std::to_string(ratios.size()) + " entries, expected " +
                      std::to_string(nt - 1));
  }
  if (ratios[0] != 1.0) throw ConfigError("first coupling ratio must be 1 (normalized to g_ge)");
  SparseMat s(nt, nt);
  std::vector<Triplet> t;
  for (int l = 1; l < nt; ++l) {
    if (!(ratios[l - 1] >= 0.0)) throw ConfigError("coupling ratios must be >= 0");
    t.emplace_back(l - 1, l, ratios[l - 1]);
  }
  s.setFromTriplets(t.begin(), t.end());
  return tensor_embed(sparse_identity(dims.n_cavity()), s, dims);
}

Operator identity(SpaceDims dims) { return Operator(dims, sparse_identity(dims.total())); }

Operator excitation_number(SpaceDims dims) {
  SparseMat n(dims.total(), dims.total());
  std::vector<Triplet> t;
  for (int i = 0; i < dims.total(); ++i) t.emplace_back(i, i, static_cast<double>(dims.excitations(i)));
  n.setFromTriplets(t.begin(), t.end());
  return Operator(dims, std::move(n));
}

Operator transmon_number(SpaceDims dims) {
  SparseMat m(dims.n_transmon(), dims.n_transmon());
  std::vector<Triplet> t;
  for (int l = 0; l < dims.n_transmon(); ++l) t.emplace_back(l, l, static_cast<double>(l));
  m.setFromTriplets(t.begin(), t.end());
  return tensor_embed(sparse_identity(dims.n_cavity()), m, dims);
}

Operator transmon_projector(SpaceDims dims, int level) {
  if (level < 0 || level >= dims.n_transmon()) throw DimensionError("transmon level out of range");
  SparseMat p(dims.n_transmon(), dims.n_transmon());
  p.insert(level, level) = 1.0;
  return tensor_embed(sparse_identity(dims.n_cavity()), p, dims);
}

int min_cavity_levels(double n_th) {
  const double need = 5.0 * n_th + 4.0 * std::sqrt(std::max(n_th, 0.0));
  return std::max(10, static_cast<int>(std::ceil(need)));
}

std::optional<std::string> truncation_warning(int n_cavity, double n_th) {
  const int need = min_cavity_levels(n_th);
  if (n_cavity >= need) return std::nullopt;
  return "cavity truncation " + std::to_string(n_cavity) + " is below the " + std::to_string(need) +
         " levels recommended for n_th = " + std::to_string(n_th);
}

DenseMat thermal_cavity_state(int n, double n_th) {
  if (n_th < 0.0) throw ConfigError("n_th must be >= 0");
  DenseMat rho = DenseMat::Zero(n, n);
  if (n_th == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double q = n_th / (1.0 + n_th);
  double p = 1.0, sum = 0.0;
  for (int k = 0; k < n; ++k) {
    rho(k, k) = p;
    sum += p;
    p *= q;
  }
  return rho / sum;
}

std::string serialize(const Operator& op) {
  nlohmann::json j;
  j["n_cavity"] = op.dims().n_cavity();
  j["n_transmon"] = op.dims().n_transmon();
  j["unit"] = op.unit() == Unit::dimensionless ? "dimensionless" : "angular_frequency";
  auto& entries = j["entries"] = nlohmann::json::array();
  const SparseMat& m = op.matrix();
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMat::InnerIterator it(m, c); it; ++it)
      entries.push_back({it.row(), c, it.value().real(), it.value().imag()});
  return j.dump();
}

Operator deserialize_operator(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("operator parse error: ") + e.what());
  }
  try {
    const SpaceDims dims(j.at("n_cavity").get<int>(), j.at("n_transmon").get<int>());
    const std::string unit = j.at("unit").get<std::string>();
    if (unit != "dimensionless" && unit != "angular_frequency") throw ConfigError("unknown operator unit '" + unit + "'");
    std::vector<Triplet> t;
    for (const auto& e : j.at("entries")) {
      t.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(), cplx(e.at(2).get<double>(), e.at(3).get<double>()));
    }
    SparseMat m(dims.total(), dims.total());
    m.setFromTriplets(t.begin(), t.end());
    return Operator(dims, std::move(m), unit == "dimensionless" ? Unit::dimensionless : Unit::angular_frequency);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("operator schema error: ") + e.what());
  }
}

}  // namespace cqed
