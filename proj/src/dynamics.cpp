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
#include "cqed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"
#include "cqed/lsq.hpp"

namespace cqed {

namespace {

using Triplet = Eigen::Triplet<cplx>;
using kernels::CsrMat;

bool check_conservation(SpaceDims dims, const SparseMat& s) {
  for (int c = 0; c < s.outerSize(); ++c) {
    const int qc = vec_charge(dims, c);
    for (SparseMat::InnerIterator it(s, c); it; ++it)
      if (vec_charge(dims, it.row()) != qc) return false;
  }
  return true;
}

SparseMat submatrix(const SparseMat& m, const std::vector<Eigen::Index>& indices) {
  std::vector<Eigen::Index> pos(m.rows(), -1);
  for (size_t p = 0; p < indices.size(); ++p) pos[indices[p]] = static_cast<Eigen::Index>(p);
  std::vector<Triplet> t;
  for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(indices.size()); ++p)
    for (SparseMat::InnerIterator it(m, indices[p]); it; ++it)
      if (pos[it.row()] >= 0) t.emplace_back(pos[it.row()], p, it.value());
  SparseMat out(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(indices.size()));
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
  std::vector<Eigen::Index> v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = k;
  return v;
}

// Sectors occupied by a state; empty when the state is zero.
std::set<int> occupied_sectors(const DensityMatrix& rho) {
  std::set<int> s;
  const DenseMat& m = rho.matrix();
  const SpaceDims& dims = rho.dims();
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i)
      if (m(i, j) != cplx(0.0, 0.0)) s.insert(dims.excitations(i) - dims.excitations(j));
  return s;
}

DensityMatrix embed(SpaceDims dims, const std::vector<Eigen::Index>& indices, const DenseVec& y) {
  const Eigen::Index d = dims.total();
  DenseVec full = DenseVec::Zero(d * d);
  for (size_t p = 0; p < indices.size(); ++p) full[indices[p]] = y[static_cast<Eigen::Index>(p)];
  return DensityMatrix::from_vec(dims, full);
}

// Row vector w with w . vec(rho) = Tr(O rho), restricted to indices.
DenseVec trace_row(const Operator& o, const std::vector<Eigen::Index>& indices) {
  const DenseMat od = o.dense();
  const Eigen::Index d = od.rows();
  DenseVec w(static_cast<Eigen::Index>(indices.size()));
  for (size_t p = 0; p < indices.size(); ++p) {
    const Eigen::Index i = indices[p] % d, j = indices[p] / d;
    w[static_cast<Eigen::Index>(p)] = od(j, i);
  }
  return w;
}

class Generator {
 public:
  Generator(CsrMat a, std::vector<std::pair<CsrMat, std::function<double(double)>>> td)
      : a_(std::move(a)), td_(std::move(td)) {}

  void operator()(double t, const DenseVec& y, DenseVec& out) const {
    kernels::apply_parallel(a_, y, out);
    for (const auto& [m, coef] : td_) {
      const double c = coef(t);
      if (c == 0.0) continue;
      kernels::apply_parallel(m, y, tmp_);
      out += c * tmp_;
    }
  }

  const CsrMat& matrix() const { return a_; }
  bool time_dependent() const { return !td_.empty(); }

 private:
  CsrMat a_;
  std::vector<std::pair<CsrMat, std::function<double(double)>>> td_;
  mutable DenseVec tmp_;
};

double scaled_rms(const DenseVec& e, const DenseVec& y0, const DenseVec& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    acc += std::norm(e[i]) / (sc * sc);
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(e.size(), 1)));
}

// Dormand-Prince 5(4) with FSAL, stepping exactly onto t_end.
class DormandPrince {
 public:
  DormandPrince(const Generator& f, const EvolveOptions& opts, EvolveStats& stats)
      : f_(f), opts_(opts), stats_(stats) {}

  void advance(double& t, DenseVec& y, double t_end) {
    if (t_end <= t) return;
    if (!have_k1_) {
      f_(t, y, k1_);
      have_k1_ = true;
      if (h_ <= 0.0) {
        const double d0 = scaled_rms(y, y, y, opts_.rtol, opts_.atol);
        const double d1 = scaled_rms(k1_, y, y, opts_.rtol, opts_.atol);
        h_ = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * (t_end - t) : 0.01 * d0 / d1;
      }
    }
    while (t < t_end) {
      if (++stats_.steps > opts_.max_steps) throw NumericalError("evolve: step budget exhausted at t = " + fmt(t));
      bool last = false;
      double h = h_;
      if (t + h >= t_end) {
        h = t_end - t;
        last = true;
      }
      step(t, y, h);
      const double err = scaled_rms(err_, y, ynew_, opts_.rtol, opts_.atol);
      if (err <= 1.0 && std::isfinite(err)) {
        t = last ? t_end : t + h;
        y.swap(ynew_);
        k1_.swap(k7_);
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // Keep the natural step size when the last step was shortened to hit t_end.
        h_ = last ? std::max(h_, h * fac) : h * fac;
      } else {
        ++stats_.rejected;
        const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
        h_ = h * fac;
        if (h_ < 1e-14 * std::max(std::abs(t), std::abs(t_end)) || h_ == 0.0) {
          std::ostringstream os;
          os << "evolve: step size underflow (stiff system?) at t = " << t << " s, h = " << h_
             << " s, error norm = " << err;
          throw NumericalError(os.str());
        }
      }
    }
  }

 private:
  static std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }

  void step(double t, const DenseVec& y, double h) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    f_(t + c2 * h, y + h * (a21 * k1_), k2_);
    f_(t + c3 * h, y + h * (a31 * k1_ + a32 * k2_), k3_);
    f_(t + c4 * h, y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_), k4_);
    f_(t + c5 * h, y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_), k5_);
    f_(t + h, y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_), k6_);
    ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    f_(t + h, ynew_, k7_);
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  const Generator& f_;
  const EvolveOptions& opts_;
  EvolveStats& stats_;
  double h_ = 0.0;
  bool have_k1_ = false;
  DenseVec k1_, k2_, k3_, k4_, k5_, k6_, k7_, ynew_, err_;
};

// Arnoldi approximation of exp(dt A) v with substepping on the Krylov error estimate.
void krylov_advance(const CsrMat& a, DenseVec& v, double dt, const EvolveOptions& opts, EvolveStats& stats) {
  const Eigen::Index n = v.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, n));
  double t = 0.0;
  double h = dt;
  DenseMat basis(n, m_max + 1);
  DenseVec w;
  while (t < dt) {
    const double beta = v.norm();
    if (beta == 0.0) return;
    DenseMat hess = DenseMat::Zero(m_max + 1, m_max);
    basis.col(0) = v / beta;
    int m = m_max;
    bool happy = false;
    for (int j = 0; j < m_max; ++j) {
      kernels::apply_parallel(a, basis.col(j), w);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const cplx hij = basis.col(i).dot(w);
          hess(i, j) += hij;
          w -= hij * basis.col(i);
        }
      }
      const double nw = w.norm();
      hess(j + 1, j) = nw;
      if (nw <= 1e-13 * hess.topLeftCorner(j + 1, j + 1).norm()) {
        m = j + 1;
        happy = true;
        break;
      }
      basis.col(j + 1) = w / nw;
    }
    const double h_next = std::abs(hess(m, m - 1));
    const double tol = std::max(opts.rtol * beta, opts.atol);
    for (;;) {
      if (++stats.steps > opts.max_steps) throw NumericalError("evolve: Krylov step budget exhausted");
      const double hs = std::min(h, dt - t);
      const DenseMat f = (hs * hess.topLeftCorner(m, m)).exp();
      const double err = happy ? 0.0 : beta * h_next * hs * std::abs(f(m - 1, 0));
      if (std::isfinite(err) && err <= tol) {
        v = beta * (basis.leftCols(m) * f.col(0));
        t = (hs == dt - t) ? dt : t + hs;
        h = err < 0.1 * tol ? 1.5 * hs : hs;
        break;
      }
      ++stats.rejected;
      h = 0.5 * hs;
      if (h < 1e-14 * dt) throw NumericalError("evolve: Krylov step size underflow");
    }
  }
}

}  // namespace

int vec_charge(SpaceDims dims, Eigen::Index k) {
  const Eigen::Index d = dims.total();
  return dims.excitations(static_cast<int>(k % d)) - dims.excitations(static_cast<int>(k / d));
}

Liouvillian::Liouvillian(SpaceDims dims, SparseMat superop, std::vector<Channel> provenance,
                         std::string hamiltonian_id, Frequency frame)
    : dims_(dims),
      superop_(std::move(superop)),
      provenance_(std::move(provenance)),
      hamiltonian_id_(std::move(hamiltonian_id)),
      frame_(frame) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(dims_.total()) * dims_.total();
  if (superop_.rows() != d2 || superop_.cols() != d2) throw DimensionError("superoperator shape mismatch");
  superop_.prune(cplx(0.0, 0.0));
  superop_.makeCompressed();
  conserves_excitations_ = check_conservation(dims_, superop_);
}

bool Liouvillian::has_channel(const std::string& name) const {
  return std::any_of(provenance_.begin(), provenance_.end(),
                     [&](const Channel& c) { return c.name == name && c.rate > 0.0; });
}

double Liouvillian::scale() const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < superop_.nonZeros(); ++k) s = std::max(s, std::abs(superop_.valuePtr()[k]));
  return s;
}

double Liouvillian::trace_defect() const {
  const int d = dims_.total();
  // vec(I)^T L is the sum of the rows k = i + i d.
  double worst = 0.0;
  double norm_inf = 0.0;
  std::vector<double> row_abs(superop_.rows(), 0.0);
  for (int c = 0; c < superop_.outerSize(); ++c) {
    cplx acc = 0.0;
    for (SparseMat::InnerIterator it(superop_, c); it; ++it) {
      if (it.row() % (d + 1) == 0) acc += it.value();
      row_abs[it.row()] += std::abs(it.value());
    }
    worst = std::max(worst, std::abs(acc));
  }
  for (double r : row_abs) norm_inf = std::max(norm_inf, r);
  return norm_inf > 0.0 ? worst / norm_inf : 0.0;
}

SectorBlock restrict_to_sector(const Liouvillian& L, int charge) {
  SectorBlock out;
  out.charge = charge;
  const Eigen::Index n = L.superop().rows();
  for (Eigen::Index k = 0; k < n; ++k)
    if (vec_charge(L.dims(), k) == charge) out.indices.push_back(k);
  out.block = submatrix(L.superop(), out.indices);
  return out;
}

SparseMat lindblad_dissipator(const Operator& c) {
  const int d = c.dims().total();
  const SparseMat id = sparse_identity(d);
  const SparseMat& cm = c.matrix();
  const SparseMat cdc = cm.adjoint() * cm;
  const SparseMat cdc_t = cdc.transpose();
  SparseMat out = kron(SparseMat(cm.conjugate()), cm) - 0.5 * (kron(id, cdc) + kron(cdc_t, id));
  out.prune(cplx(0.0, 0.0));
  out.makeCompressed();
  return out;
}

Liouvillian build_liouvillian(const Operator& h, std::span<const CollapseChannel> channels,
                              std::string hamiltonian_id, Frequency frame) {
  const SpaceDims dims = h.dims();
  const int d = dims.total();
  const SparseMat id = sparse_identity(d);
  const SparseMat ht = h.matrix().transpose();
  SparseMat superop = cplx(0.0, -1.0) * (kron(id, h.matrix()) - kron(ht, id));
  std::vector<Liouvillian::Channel> prov;
  for (const auto& ch : channels) {
    if (!(ch.op.dims() == dims)) throw DimensionError("collapse operator '" + ch.name + "' has mismatched dims");
    if (!(ch.rate >= 0.0)) throw ConfigError("collapse channel '" + ch.name + "' has negative rate");
    prov.push_back({ch.name, ch.rate});
    if (ch.rate == 0.0) continue;
    superop += ch.rate * lindblad_dissipator(ch.op);
  }
  return Liouvillian(dims, std::move(superop), std::move(prov), std::move(hamiltonian_id), frame);
}

double steady_state_residual(const Liouvillian& L, const DensityMatrix& rho) {
  const DenseVec r = L.superop() * rho.vec();
  const double denom = L.scale() * rho.matrix().norm();
  return denom > 0.0 ? r.norm() / denom : r.norm();
}

DensityMatrix steady_state(const Liouvillian& L, const SteadyStateOptions& opts) {
  const SpaceDims dims = L.dims();
  const Eigen::Index d = dims.total();
  SectorBlock sec;
  if (L.conserves_excitations()) {
    sec = restrict_to_sector(L, 0);
  } else {
    sec.charge = 0;
    sec.indices = all_indices(d * d);
    sec.block = L.superop();
  }
  const auto n = static_cast<Eigen::Index>(sec.indices.size());

  // Replace the equation for rho_00 by the trace constraint.
  const Eigen::Index anchor = 0;  // vec index 0 is rho_00, first in every sector-0 listing
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(sec.block.nonZeros() + d));
  for (Eigen::Index c = 0; c < n; ++c)
    for (SparseMat::InnerIterator it(sec.block, c); it; ++it)
      if (it.row() != anchor) t.emplace_back(it.row(), c, it.value());
  for (Eigen::Index p = 0; p < n; ++p) {
    const Eigen::Index k = sec.indices[p];
    if (k % d == k / d) t.emplace_back(anchor, p, 1.0);
  }
  SparseMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  DenseVec rhs = DenseVec::Zero(n);
  rhs[anchor] = 1.0;

  DenseVec x;
  if (n <= opts.direct_limit) {
    Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("steady_state: singular constrained system (degenerate null space?): " +
                           lu.lastErrorMessage());
    }
    x = lu.solve(rhs);
  } else {
    Eigen::BiCGSTAB<SparseMat, Eigen::IncompleteLUT<cplx>> solver;
    solver.setTolerance(opts.iterative_tol);
    solver.setMaxIterations(20000);
    solver.compute(m);
    x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw NumericalError("steady_state: BiCGSTAB did not converge");
  }
  if (!x.allFinite()) throw NumericalError("steady_state: non-finite solution (degenerate null space?)");

  DensityMatrix raw = embed(dims, sec.indices, x);
  DenseMat rho = 0.5 * (raw.matrix() + raw.matrix().adjoint());
  rho /= rho.trace();
  DensityMatrix out(dims, std::move(rho));
  const double res = steady_state_residual(L, out);
  if (!(res <= opts.residual_tol)) {
    std::ostringstream os;
    os << "steady_state: residual " << res << " exceeds " << opts.residual_tol
       << " (degenerate or ill-conditioned null space)";
    throw NumericalError(os.str());
  }
  return out;
}

Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0, std::span<const double> times,
                  const EvolveOptions& opts) {
  if (!(rho0.dims() == L.dims())) throw DimensionError("evolve: state and Liouvillian dims differ");
  if (times.empty()) throw ConfigError("evolve: empty time grid");
  if (times[0] < 0.0) throw ConfigError("evolve: times must be >= 0");
  for (size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ConfigError("evolve: times must be strictly increasing");
  if (opts.integrator == Integrator::krylov && !opts.time_dependent.empty())
    throw ConfigError("evolve: the Krylov backend supports time-independent generators only");

  const SpaceDims dims = L.dims();
  const Eigen::Index d = dims.total();

  bool reduce = L.conserves_excitations();
  for (const auto& term : opts.time_dependent) reduce = reduce && check_conservation(dims, term.superop);
  const auto sectors = occupied_sectors(rho0);
  std::vector<Eigen::Index> indices;
  if (reduce && sectors.size() == 1) {
    indices = restrict_to_sector(L, *sectors.begin()).indices;
  } else {
    indices = all_indices(d * d);
  }
  const bool full = static_cast<Eigen::Index>(indices.size()) == d * d;

  const SparseMat a = full ? L.superop() : submatrix(L.superop(), indices);
  std::vector<std::pair<CsrMat, std::function<double(double)>>> td;
  for (const auto& term : opts.time_dependent)
    td.emplace_back(CsrMat(full ? term.superop : submatrix(term.superop, indices)), term.coefficient);
  const Generator gen{CsrMat(a), std::move(td)};

  DenseVec y(static_cast<Eigen::Index>(indices.size()));
  {
    const DenseVec v0 = rho0.vec();
    for (size_t p = 0; p < indices.size(); ++p) y[static_cast<Eigen::Index>(p)] = v0[indices[p]];
  }
  const DenseVec trace_w = trace_row(identity(dims), indices);
  std::vector<std::pair<std::string, DenseVec>> obs;
  for (const auto& [name, op] : opts.observables) obs.emplace_back(name, trace_row(op, indices));
  const cplx trace0 = trace_w.cwiseProduct(y).sum();

  Trajectory traj;
  traj.stats.system_size = static_cast<Eigen::Index>(indices.size());
  for (const auto& [name, w] : obs) traj.observables[name].reserve(times.size());
  DormandPrince rk(gen, opts, traj.stats);

  double t = 0.0;
  for (double target : times) {
    if (opts.integrator == Integrator::rk45) {
      rk.advance(t, y, target);
    } else if (target > t) {
      krylov_advance(gen.matrix(), y, target - t, opts, traj.stats);
    }
    t = target;
    if (!y.allFinite()) throw NumericalError("evolve: state became non-finite");
    traj.times.push_back(t);
    const cplx tr = trace_w.cwiseProduct(y).sum();
    traj.stats.max_trace_drift = std::max(traj.stats.max_trace_drift, std::abs(tr - trace0));
    for (const auto& [name, w] : obs) traj.observables[name].push_back(w.cwiseProduct(y).sum().real());
    if (opts.store_states) traj.states.push_back(embed(dims, indices, y));
  }
  return traj;
}

Trajectory rabi_sequence(const DeviceParams& p, double n_th, std::span<const double> tau_grid, RabiInitial initial,
                         const RabiOptions& opts) {
  if (!(n_th >= 0.0)) throw ConfigError("rabi_sequence: n_th must be >= 0");
  for (double tau : tau_grid)
    if (tau < 0.0) throw ConfigError("rabi_sequence: tau must be >= 0");
  DeviceParams resonant = p;
  resonant.detuning = Frequency();
  const SpaceDims dims(opts.n_cavity, opts.n_transmon);

  const Operator h = jc_hamiltonian(resonant, dims, resonant.nu_r);
  const auto channels = collapse_operators(resonant, n_th, dims, opts.include_dephasing);
  const Liouvillian L = build_liouvillian(h, channels, "jc_resonant", resonant.nu_r);

  DenseMat qubit = DenseMat::Zero(dims.n_transmon(), dims.n_transmon());
  qubit(initial == RabiInitial::ground ? 0 : 1, initial == RabiInitial::ground ? 0 : 1) = 1.0;
  const DensityMatrix rho0 = DensityMatrix::product(dims, thermal_cavity_state(dims.n_cavity(), n_th), qubit);

  EvolveOptions eo = opts.evolve;
  eo.observables.emplace_back("P_e", transmon_projector(dims, 1));
  if (opts.rise_time > 0.0) {
    const Operator nq = transmon_number(dims);
    const SparseMat id = sparse_identity(dims.total());
    const SparseMat comm = cplx(0.0, -1.0) * (kron(id, nq.matrix()) - kron(SparseMat(nq.matrix().transpose()), id));
    const double w0 = opts.idle_detuning.rad_per_s();
    const double rise = opts.rise_time;
    eo.time_dependent.push_back({comm, [w0, rise](double t) { return t < rise ? w0 * (1.0 - t / rise) : 0.0; }});
  }
  Trajectory traj = evolve(L, rho0, tau_grid, eo);
  if (auto w = truncation_warning(dims.n_cavity(), n_th)) traj.warnings.push_back(*w);
  return traj;
}

OscillationFit fit_damped_oscillation(std::span<const double> t, std::span<const double> y, double omega_guess,
                                      double decay_guess) {
  if (t.size() != y.size() || t.size() < 6) throw ConfigError("fit_damped_oscillation: need >= 6 samples");
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::Map<const Eigen::VectorXd> tv(t.data(), n), yv(y.data(), n);
  const double mean = yv.mean();
  const double half_range = 0.5 * (yv.maxCoeff() - yv.minCoeff());
  // params: offset, amplitude, log(rate), omega, phase, transient
  auto model = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
    const double rate = std::exp(q[2]);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r[i] = q[0] + std::exp(-rate * tv[i]) * (q[5] - q[1] * std::cos(q[3] * tv[i] + q[4])) - yv[i];
    return r;
  };
  LsqResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (double phase0 : {0.0, 0.5 * std::numbers::pi, std::numbers::pi, 1.5 * std::numbers::pi}) {
    Eigen::VectorXd q0(6);
    q0 << mean, half_range, std::log(1.0 / decay_guess), omega_guess, phase0, yv[0] - mean;
    try {
      LsqResult r = levenberg_marquardt(model, q0);
      if (r.rss < best.rss) best = r;
    } catch (const NumericalError&) {
    }
  }
  if (!std::isfinite(best.rss)) throw NumericalError("fit_damped_oscillation: no fit converged");
  OscillationFit out;
  out.offset = best.params[0];
  out.transient = best.params[5];
  out.amplitude = best.params[1];
  out.phase = best.params[4];
  if (out.amplitude < 0.0) {
    out.amplitude = -out.amplitude;
    out.phase += std::numbers::pi;
  }
  out.omega = best.params[3];
  if (out.omega < 0.0) {
    out.omega = -out.omega;
    out.phase = -out.phase;
  }
  out.phase = std::remainder(out.phase, 2.0 * std::numbers::pi);
  out.decay_time = std::exp(-best.params[2]);
  const double sst = (yv.array() - mean).square().sum();
  out.r2 = sst > 0.0 ? 1.0 - best.rss / sst : 1.0;
  return out;
}

double tail_mean(std::span<const double> t, std::span<const double> y, double t_from) {
  double acc = 0.0;
  int count = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t_from) {
      acc += y[i];
      ++count;
    }
  }
  if (count == 0) throw ConfigError("tail_mean: no samples after t_from");
  return acc / count;
}

}  // namespace cqed
