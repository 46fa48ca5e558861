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

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqed/dynamics.hpp"
#include "cqed/errors.hpp"
#include "cqed/response.hpp"

namespace cqed {

/// n_th = 0 has no finite equivalent temperature.
class NoFiniteTemperature : public Error {
 public:
  using Error::Error;
};

enum class ThermalSource { applied_noise, fitted_spectrum, fitted_rabi };

struct ThermalPoint {
  double n_th = 0.0;
  double T_c = 0.0;  // K
  double nu_ghz = 0.0;
  ThermalSource source = ThermalSource::applied_noise;
};

/// Bose-Einstein occupation 1 / (exp(h nu / k_B T) - 1).
double nth_from_temperature(double T_kelvin, double nu_ghz);
/// (h nu / k_B) / ln(1 + 1/n_th). Throws NoFiniteTemperature for n_th = 0.
double temperature_from_nth(double n_th, double nu_ghz);
ThermalPoint make_thermal_point(double n_th, double nu_ghz, ThermalSource source);

/// Applied white-noise density S_n (dBm/Hz, attenuation already folded in)
/// as a photon occupation S_n / (h nu), plus the background n0.
double nth_from_noise(double s_dbm_hz, double nu_ghz, double n0);
/// Inverse of nth_from_noise without background: S_n in dBm/Hz for n photons.
double noise_for_nth(double n_photons, double nu_ghz);

struct NoiseCalibration {
  double s_dbm_hz = -std::numeric_limits<double>::infinity();
  double n0 = 0.0;
  double attenuation_db = 0.0;
};

struct SpectrumData {
  std::vector<double> freqs_ghz;
  std::vector<double> power;
};

struct RabiData {
  std::vector<double> tau_s;
  std::vector<double> p_e;
};

struct FitConfig {
  double n_max = 5.0;
  int scan_points = 14;
  int max_iter = 100;
  /// Model truncation; defaults to (spectral_cavity_levels(n_max), 3) for
  /// spectra and (min_cavity_levels(n_max), 2) for Rabi traces.
  std::optional<SpaceDims> dims;
  /// Model spectra are normalized against the qubit at this detuning.
  Frequency reference_detuning = Frequency::ghz(-2.0);
  bool normalize_to_reference = true;
  bool parallel = true;
  RabiInitial initial = RabiInitial::ground;
  double exclude_tau_below = 0.0;  // s
  double exclude_tau_above = std::numeric_limits<double>::infinity();
  RabiOptions rabi;
};

struct ThermalFit {
  double n_th = 0.0;
  double T_c = 0.0;  // K, +inf never; 0 when n_th = 0
  double nu_ghz = 0.0;
  double residual_rms = 0.0;
  /// 1-sigma half width: the larger of sigma_curvature and sigma_robust.
  double sigma = 0.0;
  /// delta chi^2 = 1 from the misfit curvature with a pooled noise estimate.
  double sigma_curvature = 0.0;
  /// Sandwich estimate that allows the noise level to vary between points.
  double sigma_robust = 0.0;
  double ci_low = 0.0, ci_high = 0.0;      // 1-sigma interval, clipped at 0
  double ci90_low = 0.0, ci90_high = 0.0;  // 1.645 sigma
  bool at_boundary = false;
  bool insensitive = false;
  ThermalSource method = ThermalSource::fitted_spectrum;
  int iterations = 0;
  int evaluations = 0;
  std::vector<std::string> warnings;
};

/// Forward model used by the spectral fit: the normalized transmission at n_th.
std::vector<double> model_power(const DeviceParams& p, double n_th, std::span<const double> freqs_ghz,
                                const FitConfig& cfg);
std::vector<double> model_rabi(const DeviceParams& p, double n_th, std::span<const double> tau_s,
                               const FitConfig& cfg);

/// n_th as the single free parameter of the transmission model.
ThermalFit fit_nth_spectrum(const SpectrumData& measured, const DeviceParams& p, const FitConfig& cfg = {});
/// n_th as the single free parameter of the vacuum Rabi model.
ThermalFit fit_nth_rabi(const RabiData& measured, const DeviceParams& p, const FitConfig& cfg = {});

struct CalibrationPoint {
  double s_dbm_hz;
  double n_th;
  double sigma;  // <= 0 means unweighted
};

struct CalibrationLine {
  double n0 = 0.0;
  double slope = 0.0;
  double n0_sigma = 0.0;
  double slope_sigma = 0.0;
  std::vector<double> residuals;  // n_th - (n0 + slope x)
};

/// Weighted least squares of fitted n_th against the applied photon number
/// S_n / (h nu). Needs >= 3 points and >= 2 distinct noise levels.
CalibrationLine calibration_line(std::span<const CalibrationPoint> points, double nu_ghz);
CalibrationLine calibration_line(std::span<const std::pair<double, ThermalFit>> points, double nu_ghz);

}  // namespace cqed
