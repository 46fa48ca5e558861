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

#include "cqed/device.hpp"
#include "cqed/dynamics.hpp"

namespace cqed {

enum class SpectrumMethod { resolvent, weak_drive };

/// Transmission spectrum on a probe-frequency grid.
///
/// The complex amplitude is the linear-response susceptibility
/// (kappa/2) Tr[a (-i omega - L)^-1 [a^+, rho_ss]], which equals 1 at the
/// centre of an empty-cavity resonance. power_normalized is |amplitude|^2
/// relative to that ideal peak until normalize() rescales it against a
/// measured-style reference.
struct SpectrumResult {
  std::vector<double> freqs_ghz;
  std::vector<cplx> amplitude;
  std::vector<double> power_normalized;
  SpectrumMethod method = SpectrumMethod::resolvent;
  std::optional<DeviceParams> params;
  double n_th = 0.0;
  /// False when an override put a dephasing channel into the spectroscopy model.
  bool paper_model = true;
  std::vector<int> failed_points;
  std::vector<std::string> warnings;
};

std::vector<double> linear_grid(double start, double stop, int points);
/// nu_r +- 150 MHz, 801 points.
std::vector<double> default_grid(const DeviceParams& p);

/// |1 - A| for an uncoupled thermal cavity truncated to n_cavity levels,
/// probed on resonance. The untruncated answer is exactly 1 at any n_th.
double bare_cavity_truncation_error(int n_cavity, double n_th);
/// Smallest n_cavity >= min_cavity_levels(n_th) with
/// bare_cavity_truncation_error <= tol.
int spectral_cavity_levels(double n_th, double tol = 1e-4);

struct ResolventOptions {
  double amplitude_scale = 1.0;
  bool parallel = true;
  bool allow_dephasing = false;
};

/// One sparse solve per frequency point on the charge +1 sector of L.
SpectrumResult transmission_resolvent(const Liouvillian& L, const Operator& a, const DensityMatrix& rho_ss,
                                      std::span<const double> freqs_ghz, const ResolventOptions& opts = {});

struct SpectrumOptions {
  bool parallel = true;
  /// Puts gamma_phi dephasing into the model; the result is flagged as non-paper-model.
  bool allow_dephasing = false;
};

/// Builds the thermal Liouvillian for (p, n_th), solves its steady state and
/// evaluates transmission_resolvent with the kappa/2 amplitude scale.
SpectrumResult transmission_spectrum(const DeviceParams& p, double n_th, SpaceDims dims,
                                     std::span<const double> freqs_ghz, const SpectrumOptions& opts = {});

/// Same model with the qubit moved to reference_detuning.
SpectrumResult reference_spectrum(const DeviceParams& p, double n_th, SpaceDims dims,
                                  std::span<const double> freqs_ghz, Frequency reference_detuning,
                                  const SpectrumOptions& opts = {});

/// Explicit drive epsilon (a + a^+) in the frame of each probe tone; reports
/// i <a> kappa / (2 epsilon). A warning is attached when the coherent probe
/// population |<a>|^2 exceeds 0.1 photons.
SpectrumResult transmission_weak_drive(const DeviceParams& p, double n_th, SpaceDims dims,
                                       std::span<const double> freqs_ghz, Frequency epsilon,
                                       const SpectrumOptions& opts = {});
/// Largest |<a>|^2 reached by a weak-drive sweep (recomputed from amplitude).
double max_probe_photons(const SpectrumResult& weak, Frequency epsilon);

/// power = |A|^2 / max |A_ref|^2 on an identical grid.
SpectrumResult normalize(const SpectrumResult& spectrum, const SpectrumResult& reference);

struct LorentzianFit {
  double center_ghz = 0.0;
  double fwhm_mhz = 0.0;
  double peak = 0.0;
  double baseline = 0.0;
  double residual_norm = 0.0;  // RMS
  double r2 = 0.0;
  bool converged = false;
  /// r2 >= 0.9
  bool lorentzian = false;
};

/// A (w/2)^2 / ((nu - nu0)^2 + (w/2)^2) + baseline by Levenberg-Marquardt,
/// started from the peak position and half-maximum crossings.
LorentzianFit fit_lorentzian(std::span<const double> freqs_ghz, std::span<const double> power);
LorentzianFit fit_lorentzian(const SpectrumResult& spectrum);

struct ClassicalityReport {
  double threshold = 0.0;          // (g/kappa)^2
  double threshold_rounded = 0.0;  // two significant digits
  double n_th = 0.0;
  bool classical = false;          // n_th > threshold
  double dissipation_ratio = 0.0;  // sqrt(n) g / (n kappa), +inf at n = 0
  double nonlinearity_ratio = 0.0; // 2 g (sqrt(n+1) - sqrt(n)) / kappa
  std::string note;
};

ClassicalityReport classicality_report(const DeviceParams& p, double n_th);

}  // namespace cqed
