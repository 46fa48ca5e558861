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
#include "cqed/device.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "cqed/errors.hpp"

namespace cqed {

void DeviceParams::validate() const {
  if (!(E_C.rad_per_s() > 0.0)) throw ConfigError("E_C must be > 0");
  if (!(E_J_max.rad_per_s() > 0.0)) throw ConfigError("E_J_max must be > 0");
  if (!(nu_r.rad_per_s() > 0.0)) throw ConfigError("nu_r must be > 0");
  auto nonneg = [](Frequency f, const char* name) {
    if (!(f.rad_per_s() >= 0.0)) throw ConfigError(std::string(name) + " must be >= 0");
  };
  nonneg(kappa, "kappa");
  nonneg(gamma, "gamma");
  nonneg(g_ge, "g_ge");
  if (gamma_phi) nonneg(*gamma_phi, "gamma_phi");
  if (!std::isfinite(flux)) throw ConfigError("flux must be finite");
  for (double r : coupling_ratios)
    if (!(r >= 0.0)) throw ConfigError("coupling ratios must be >= 0");
  if (!coupling_ratios.empty() && coupling_ratios.front() != 1.0)
    throw ConfigError("first coupling ratio must be 1");
  if (detuning) {
    // nu_ge = sqrt(8 E_C E_J) - E_C must be reachable with E_J <= E_J_max.
    const double nu_ge = (nu_r + *detuning).ghz();
    if (nu_ge <= 0.0) throw ConfigError("detuning places the qubit at a non-positive frequency");
    if (josephson_energy(*this).ghz() > E_J_max.ghz() * (1.0 + 1e-12))
      throw ConfigError("detuning requires E_J above E_J_max");
  }
}

Frequency ej_of_flux(Frequency ej_max, double flux) {
  return ej_max * std::abs(std::cos(std::numbers::pi * flux));
}

Frequency josephson_energy(const DeviceParams& p) {
  if (!p.detuning) return ej_of_flux(p.E_J_max, p.flux);
  // Invert nu_ge = sqrt(8 E_C E_J) - E_C.
  const double ec = p.E_C.ghz();
  const double s = (p.nu_r + *p.detuning).ghz() + ec;
  return Frequency::ghz(s * s / (8.0 * ec));
}

double effective_flux(const DeviceParams& p) {
  if (!p.detuning) return p.flux;
  const double ratio = std::clamp(josephson_energy(p).ghz() / p.E_J_max.ghz(), 0.0, 1.0);
  return std::acos(ratio) / std::numbers::pi;
}

TransmonLevels transmon_frequencies(Frequency E_C, Frequency E_J, int n_levels) {
  if (n_levels < 2) throw ConfigError("transmon model needs at least 2 levels");
  TransmonLevels out;
  const double ec = E_C.ghz();
  const double plasma = std::sqrt(8.0 * ec * E_J.ghz());
  for (int m = 0; m < n_levels; ++m) {
    const double md = m;
    out.levels.push_back(Frequency::ghz(plasma * md - ec * (md * md + md) / 2.0));
  }
  if (E_J.ghz() / ec < 20.0) {
    out.warning = "E_J/E_C = " + std::to_string(E_J.ghz() / ec) + " < 20: asymptotic transmon spectrum inaccurate";
  }
  return out;
}

Frequency qubit_frequency(const DeviceParams& p) {
  return transmon_frequencies(p.E_C, josephson_energy(p), 2).levels[1];
}

std::vector<double> coupling_ratios(const DeviceParams& p, int n_transmon) {
  if (!p.coupling_ratios.empty()) {
    if (static_cast<int>(p.coupling_ratios.size()) != n_transmon - 1) {
      throw ConfigError("coupling_ratios has " + std::to_string(p.coupling_ratios.size()) +
                        " entries but n_transmon = " + std::to_string(n_transmon));
    }
    return p.coupling_ratios;
  }
  std::vector<double> r;
  for (int l = 1; l < n_transmon; ++l) r.push_back(std::sqrt(static_cast<double>(l)));
  return r;
}

Operator jc_hamiltonian(const DeviceParams& p, SpaceDims dims, Frequency frame) {
  const int nt = dims.n_transmon();
  const auto levels = transmon_frequencies(p.E_C, josephson_energy(p), nt).levels;
  const double wr = p.nu_r.rad_per_s() - frame.rad_per_s();
  const double wf = frame.rad_per_s();

  std::vector<Eigen::Triplet<cplx>> t;
  for (int i = 0; i < dims.total(); ++i) {
    const int m = dims.level(i);
    t.emplace_back(i, i, wr * dims.fock(i) + levels[m].rad_per_s() - wf * m);
  }
  SparseMat diag(dims.total(), dims.total());
  diag.setFromTriplets(t.begin(), t.end());

  const auto ratios = coupling_ratios(p, nt);
  const Operator a = annihilation(dims);
  const Operator s = transmon_lowering(dims, ratios);
  const SparseMat adag_s = a.matrix().adjoint() * s.matrix();
  const SparseMat coupling = adag_s + SparseMat(adag_s.adjoint());
  return Operator(dims, SparseMat(diag + p.g_ge.rad_per_s() * coupling), Unit::angular_frequency);
}

std::vector<CollapseChannel> collapse_operators(const DeviceParams& p, double n_th, SpaceDims dims,
                                                bool include_dephasing) {
  if (!(n_th >= 0.0)) throw ConfigError("n_th must be >= 0");
  const double kappa = p.kappa.rad_per_s();
  const Operator a = annihilation(dims);
  const auto ratios = coupling_ratios(p, dims.n_transmon());
  std::vector<CollapseChannel> out;
  out.push_back({"cavity_loss", a, (n_th + 1.0) * kappa});
  out.push_back({"thermal_gain", a.adjoint(), n_th * kappa});
  out.push_back({"transmon_relaxation", transmon_lowering(dims, ratios), p.gamma.rad_per_s()});
  if (include_dephasing) {
    if (!p.gamma_phi) throw ConfigError("dephasing requested but gamma_phi is not set");
    out.push_back({"transmon_dephasing", transmon_number(dims), p.gamma_phi->rad_per_s()});
  }
  return out;
}

const DressedState& DressedLevels::state(int n, int label) const {
  if (n < 0 || n >= static_cast<int>(blocks.size())) throw ConfigError("dressed block out of range");
  for (const auto& s : blocks[n])
    if (s.label == label) return s;
  throw ConfigError("no dressed state with that label");
}

double DressedLevels::transition(int from_n, int from_label, int to_n, int to_label) const {
  for (const auto& t : transitions)
    if (t.from_n == from_n && t.from_label == from_label && t.to_n == to_n && t.to_label == to_label)
      return t.freq_ghz;
  throw ConfigError("transition not in table");
}

DressedLevels dressed_levels(const DeviceParams& p, int n_max, int n_transmon) {
  if (n_max < 1) throw ConfigError("dressed_levels needs n_max >= 1");
  const SpaceDims dims(n_max + 1, n_transmon);
  // Diagonalize in the frame rotating at omega_r so block eigenvalues stay O(g).
  const DenseMat h = jc_hamiltonian(p, dims, p.nu_r).dense();
  const DenseMat adag = annihilation(dims).adjoint().dense();
  const double wr = p.nu_r.rad_per_s();

  DressedLevels out;
  std::vector<std::vector<Eigen::VectorXcd>> vectors(n_max + 1);
  out.blocks.resize(n_max + 1);
  out.doublet_split.assign(n_max + 1, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    std::vector<int> idx;
    for (int i = 0; i < dims.total(); ++i)
      if (dims.excitations(i) == n) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    DenseMat hb(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) hb(r, c) = h(idx[r], idx[c]);
    Eigen::SelfAdjointEigenSolver<DenseMat> es(hb);

    std::vector<double> weight(k, 0.0);
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dims.total());
      for (int r = 0; r < k; ++r) v(idx[r]) = es.eigenvectors()(r, j);
      for (int r = 0; r < k; ++r) {
        const int i = idx[r];
        const bool in_doublet = (dims.level(i) == 0 && dims.fock(i) == n) ||
                                (dims.level(i) == 1 && dims.fock(i) == n - 1);
        if (in_doublet) weight[j] += std::norm(v(i));
      }
      vectors[n].push_back(std::move(v));
      out.blocks[n].push_back({n, 0, (es.eigenvalues()(j) + n * wr) / (2.0 * std::numbers::pi) * 1e-9, weight[j]});
    }
    if (n >= 1) {
      std::vector<int> order(k);
      for (int j = 0; j < k; ++j) order[j] = j;
      std::sort(order.begin(), order.end(), [&](int x, int y) { return weight[x] > weight[y]; });
      const int lo = std::min(order[0], order[1]);
      const int hi = std::max(order[0], order[1]);
      out.blocks[n][lo].label = -1;
      out.blocks[n][hi].label = +1;
      out.doublet_split[n] = es.eigenvalues()(hi) - es.eigenvalues()(lo);
    }
  }

  for (int n = 1; n <= n_max; ++n) {
    for (size_t i = 0; i < vectors[n - 1].size(); ++i) {
      for (size_t j = 0; j < vectors[n].size(); ++j) {
        const double strength = std::norm(vectors[n][j].dot(adag * vectors[n - 1][i]));
        if (strength < 1e-12) continue;
        const auto& from = out.blocks[n - 1][i];
        const auto& to = out.blocks[n][j];
        out.transitions.push_back({n - 1, from.label, n, to.label, to.freq_ghz - from.freq_ghz, strength});
      }
    }
  }
  return out;
}

}  // namespace cqed
