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

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cqed/device.hpp"
#include "cqed/qspace.hpp"

namespace cqed {

/// Column-stacking convention: vec(A rho B) = (B^T (x) A) vec(rho).
///
/// The superoperator is immutable after construction. Besides the matrix
/// it keeps which channels built it (for reports) and the rotating frame
/// the Hamiltonian was written in.
class Liouvillian {
 public:
  struct Channel {
    std::string name;
    double rate;  // rad/s
  };

  Liouvillian(SpaceDims dims, SparseMat superop, std::vector<Channel> provenance, std::string hamiltonian_id,
              Frequency frame);

  const SpaceDims& dims() const { return dims_; }
  const SparseMat& superop() const { return superop_; }
  const std::vector<Channel>& provenance() const { return provenance_; }
  const std::string& hamiltonian_id() const { return hamiltonian_id_; }
  Frequency frame() const { return frame_; }
  /// True when L maps every excitation-charge sector into itself.
  bool conserves_excitations() const { return conserves_excitations_; }
  bool has_channel(const std::string& name) const;

  /// ||vec(I)^T L||_inf / ||L||_inf; zero for a trace-preserving generator.
  double trace_defect() const;
  /// Largest absolute entry, used as the scale for residual checks.
  double scale() const;

 private:
  SpaceDims dims_;
  SparseMat superop_;
  std::vector<Channel> provenance_;
  std::string hamiltonian_id_;
  Frequency frame_;
  bool conserves_excitations_;
};

/// Charge exc(i) - exc(j) of the vectorized element rho_ij.
int vec_charge(SpaceDims dims, Eigen::Index k);

/// Restriction of L to one excitation-charge sector. Exact when
/// L.conserves_excitations().
struct SectorBlock {
  int charge;
  std::vector<Eigen::Index> indices;  // positions in the full vectorized space
  SparseMat block;
};
SectorBlock restrict_to_sector(const Liouvillian& L, int charge);

/// D[C] = conj(C) (x) C - (I (x) C^+C + (C^+C)^T (x) I) / 2.
SparseMat lindblad_dissipator(const Operator& c);

/// -i (I (x) H - H^T (x) I) + sum_k rate_k D[C_k].
Liouvillian build_liouvillian(const Operator& h, std::span<const CollapseChannel> channels,
                              std::string hamiltonian_id = "H", Frequency frame = Frequency());

struct SteadyStateOptions {
  /// Sector sizes above this use BiCGSTAB with an ILUT preconditioner.
  Eigen::Index direct_limit = 400000;
  double iterative_tol = 1e-13;
  double residual_tol = 1e-10;
};

/// Unique null vector of L with unit trace. Throws NumericalError when the
/// null space is degenerate or the residual check fails.
DensityMatrix steady_state(const Liouvillian& L, const SteadyStateOptions& opts = {});
/// ||L vec(rho)||_2 / (scale(L) ||rho||_F).
double steady_state_residual(const Liouvillian& L, const DensityMatrix& rho);

enum class Integrator { rk45, krylov };

/// Extra generator coefficient(t) * superop added to L during evolution.
struct TimeDependentTerm {
  SparseMat superop;
  std::function<double(double)> coefficient;
};

struct EvolveOptions {
  Integrator integrator = Integrator::rk45;
  double rtol = 1e-8;
  double atol = 1e-10;
  long max_steps = 5'000'000;
  int krylov_dim = 30;
  bool store_states = true;
  std::vector<std::pair<std::string, Operator>> observables;
  std::vector<TimeDependentTerm> time_dependent;
};

struct EvolveStats {
  long steps = 0;
  long rejected = 0;
  double max_trace_drift = 0.0;
  Eigen::Index system_size = 0;  // after sector reduction
};

struct Trajectory {
  std::vector<double> times;  // seconds
  std::vector<DensityMatrix> states;
  std::map<std::string, std::vector<double>> observables;  // real parts of Tr(O rho)
  EvolveStats stats;
  std::vector<std::string> warnings;
};

/// rho(t_k) for d rho/dt = L[rho], rho(0) = rho0. times must be strictly
/// increasing and >= 0.
Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0, std::span<const double> times,
                  const EvolveOptions& opts = {});

enum class RabiInitial { ground, pi_pulse };

struct RabiOptions {
  int n_cavity = 10;
  int n_transmon = 2;
  /// Detuning while idle. Only enters through the optional ramp.
  Frequency idle_detuning = Frequency::ghz(0.5);
  /// Linear detuning ramp from idle_detuning to resonance (seconds); 0 = step.
  double rise_time = 0.0;
  bool include_dephasing = true;
  EvolveOptions evolve;
};

/// Vacuum Rabi protocol: thermal cavity (x) |g> or |e>, then evolution on
/// resonance for each tau. Observable "P_e" holds the excited population.
Trajectory rabi_sequence(const DeviceParams& p, double n_th, std::span<const double> tau_grid,
                         RabiInitial initial, const RabiOptions& opts = {});

/// Least-squares fit of
///   y(t) = offset + exp(-t / decay_time) * (transient - amplitude * cos(omega t + phase))
/// with amplitude >= 0 and omega >= 0.
struct OscillationFit {
  double offset = 0.0;
  double transient = 0.0;
  double amplitude = 0.0;
  double decay_time = 0.0;  // seconds
  double omega = 0.0;       // rad/s
  double phase = 0.0;
  double r2 = 0.0;
};
OscillationFit fit_damped_oscillation(std::span<const double> t, std::span<const double> y, double omega_guess,
                                      double decay_guess);

/// Mean of y over the samples with t >= t_from.
double tail_mean(std::span<const double> t, std::span<const double> y, double t_from);

}  // namespace cqed
