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
#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cqed {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
using DenseMat = Eigen::MatrixXcd;
using DenseVec = Eigen::VectorXcd;

/// Truncation of the cavity (x) transmon product space.
///
/// Basis ordering is cavity-major: |n> (x) |l>  ->  n * n_transmon + l, so the
/// cavity truncation is a contiguous tail of the index range.
class SpaceDims {
 public:
  static constexpr int kMaxTransmonLevels = 8;

  SpaceDims(int n_cavity, int n_transmon);

  int n_cavity() const { return n_cavity_; }
  int n_transmon() const { return n_transmon_; }
  int total() const { return n_cavity_ * n_transmon_; }

  int index(int n, int level) const { return n * n_transmon_ + level; }
  int fock(int idx) const { return idx / n_transmon_; }
  int level(int idx) const { return idx % n_transmon_; }
  /// Total excitation number n + l of a basis state.
  int excitations(int idx) const { return fock(idx) + level(idx); }

  bool operator==(const SpaceDims&) const = default;

 private:
  int n_cavity_;
  int n_transmon_;
};

enum class Unit { dimensionless, angular_frequency };

/// Immutable sparse operator on the full product space. Storage is
/// compressed-column with sorted row indices and no explicit zeros.
class Operator {
 public:
  Operator(SpaceDims dims, SparseMat m, Unit unit = Unit::dimensionless);

  const SpaceDims& dims() const { return dims_; }
  const SparseMat& matrix() const { return m_; }
  Unit unit() const { return unit_; }
  Eigen::Index nnz() const { return m_.nonZeros(); }

  Operator adjoint() const;
  DenseMat dense() const { return DenseMat(m_); }

  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator*(cplx s, const Operator& a);

 private:
  SpaceDims dims_;
  SparseMat m_;
  Unit unit_;
};

/// Diagnostics of the density-matrix invariants.
struct StateCheck {
  double hermiticity = 0.0;  // ||rho - rho^+||_F / ||rho||_F
  double trace_error = 0.0;  // |Tr rho - 1|
  double min_eigenvalue = 0.0;

  bool ok(double herm_tol = 1e-12, double trace_tol = 1e-10, double pos_tol = -1e-8) const {
    return hermiticity <= herm_tol && trace_error <= trace_tol && min_eigenvalue >= pos_tol;
  }
};

class DensityMatrix {
 public:
  DensityMatrix(SpaceDims dims, DenseMat rho);

  /// |idx><idx| in the product basis.
  static DensityMatrix basis_state(SpaceDims dims, int idx);
  /// rho_cav (x) rho_transmon in cavity-major order.
  static DensityMatrix product(SpaceDims dims, const DenseMat& cavity, const DenseMat& transmon);

  const SpaceDims& dims() const { return dims_; }
  const DenseMat& matrix() const { return rho_; }

  cplx trace() const { return rho_.trace(); }
  /// Tr(op rho).
  cplx expect(const Operator& op) const;
  StateCheck check() const;

  /// Column-stacked vectorization, vec[i + j d] = rho_ij.
  DenseVec vec() const;
  static DensityMatrix from_vec(SpaceDims dims, const DenseVec& v);

 private:
  SpaceDims dims_;
  DenseMat rho_;
};

/// Kronecker product a (x) b, a the slow index.
SparseMat kron(const SparseMat& a, const SparseMat& b);
SparseMat sparse_identity(int n);

/// Cavity lowering operator I_transmon-embedded on the full space.
Operator annihilation(SpaceDims dims);

/// sum_l ratios[l-1] |l-1><l|, embedded on the full space. ratios[0] must be 1.
Operator transmon_lowering(SpaceDims dims, std::span<const double> ratios);

/// cav_op (x) transmon_op in the cavity-major ordering.
Operator tensor_embed(const SparseMat& cav_op, const SparseMat& transmon_op, SpaceDims dims);

Operator identity(SpaceDims dims);
/// a^+a + sum_m m |m><m|, the quantity conserved by the Jaynes-Cummings coupling.
Operator excitation_number(SpaceDims dims);
/// sum_m m |m><m| on the transmon factor.
Operator transmon_number(SpaceDims dims);
/// |m><m| on the transmon factor.
Operator transmon_projector(SpaceDims dims, int level);

/// Smallest cavity truncation considered safe for a thermal occupation n_th:
/// max(10, 5 n_th + 4 sqrt(n_th)), rounded up.
int min_cavity_levels(double n_th);
/// Warning text when n_cavity is below min_cavity_levels(n_th).
std::optional<std::string> truncation_warning(int n_cavity, double n_th);

/// Thermal (Bose-Einstein) cavity state truncated to n levels and renormalized.
DenseMat thermal_cavity_state(int n, double n_th);

// Bit-exact text round trip (JSON, 17 significant digits).
std::string serialize(const Operator& op);
Operator deserialize_operator(const std::string& text);

}  // namespace cqed
