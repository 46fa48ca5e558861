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

#include <optional>
#include <string>
#include <vector>

#include "cqed/qspace.hpp"
#include "cqed/units.hpp"

namespace cqed {

/// Physical parameters of the transmon-cavity sample. Energies are stored
/// as E/h frequencies; every rate is an angular frequency.
struct DeviceParams {
  Frequency E_C = Frequency::ghz(0.502);
  Frequency E_J_max = Frequency::ghz(14.4);
  double flux = 0.0;  // Phi / Phi_0
  /// When set, overrides flux: E_J is chosen so that nu_ge = nu_r + detuning.
  std::optional<Frequency> detuning = Frequency::ghz(0.0);
  Frequency nu_r = Frequency::ghz(6.44);
  Frequency kappa = Frequency::mhz(3.2);
  Frequency gamma = Frequency::mhz(0.6);
  /// Pure dephasing, time-domain only. Deliberately has no default.
  std::optional<Frequency> gamma_phi;
  Frequency g_ge = Frequency::mhz(54.0);
  /// g_{l-1,l}/g_ge for l = 1..n_transmon-1. Empty means sqrt(l).
  std::vector<double> coupling_ratios;

  /// Throws ConfigError on negative rates or non-positive energies.
  void validate() const;
};

/// E_J_max |cos(pi flux)|.
Frequency ej_of_flux(Frequency ej_max, double flux);

/// Josephson energy actually used by the model (flux or detuning route).
Frequency josephson_energy(const DeviceParams& p);
/// Flux bias that realizes josephson_energy(p) on the principal branch.
double effective_flux(const DeviceParams& p);

struct TransmonLevels {
  std::vector<Frequency> levels;  // ground = 0
  std::optional<std::string> warning;
};

/// Asymptotic transmon ladder E_m = sqrt(8 E_C E_J) m - E_C (m^2 + m) / 2.
/// A warning is attached when E_J / E_C < 20.
TransmonLevels transmon_frequencies(Frequency E_C, Frequency E_J, int n_levels);

Frequency qubit_frequency(const DeviceParams& p);

/// Resolved coupling ratios for an n_transmon-level model.
std::vector<double> coupling_ratios(const DeviceParams& p, int n_transmon);

/// RWA Jaynes-Cummings Hamiltonian (rad/s), optionally in a frame rotating
/// at frame * (a^+a + sum_m m|m><m|).
Operator jc_hamiltonian(const DeviceParams& p, SpaceDims dims, Frequency frame = Frequency());

struct CollapseChannel {
  std::string name;
  Operator op;
  double rate;  // rad/s
};

/// Dissipators of the thermal master equation: a at (n_th+1) kappa, a^+ at
/// n_th kappa, one summed transmon lowering at gamma, and optionally
/// sum_m m|m><m| at gamma_phi.
std::vector<CollapseChannel> collapse_operators(const DeviceParams& p, double n_th, SpaceDims dims,
                                                bool include_dephasing);

struct DressedState {
  int n;      // excitation number
  int label;  // -1 / +1 for the Jaynes-Cummings doublet, 0 otherwise
  double freq_ghz;  // energy / h relative to |g,0>
  double doublet_weight;  // overlap with span{|g,n>, |e,n-1>}
};

struct DressedTransition {
  int from_n, from_label, to_n, to_label;
  double freq_ghz;
  double strength;  // |<to|a^+|from>|^2
};

struct DressedLevels {
  std::vector<std::vector<DressedState>> blocks;  // blocks[n], ascending energy
  std::vector<DressedTransition> transitions;     // Delta n = 1
  /// Splitting of the |n,+>, |n,-> doublet in rad/s, from the shifted
  /// block eigenvalues (no cancellation against n * omega_r).
  std::vector<double> doublet_split;

  const DressedState& state(int n, int label) const;
  /// Transition frequency (GHz) between labelled states; throws if absent.
  double transition(int from_n, int from_label, int to_n, int to_label) const;
};

DressedLevels dressed_levels(const DeviceParams& p, int n_max, int n_transmon = 2);

}  // namespace cqed
