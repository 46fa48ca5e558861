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
#include "cqed/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "cqed/constants.hpp"
#include "cqed/lsq.hpp"

namespace cqed {

namespace {

// h nu / k_B in kelvin.
double quantum_temperature(double nu_ghz) { return constants::planck * nu_ghz * 1e9 / constants::boltzmann; }

double photon_energy(double nu_ghz) { return constants::planck * nu_ghz * 1e9; }

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive and finite");
}

using ResidualVector = std::function<std::vector<double>(double)>;

double rss_of(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Heteroscedasticity-robust variance of a one-parameter least-squares
// estimate with leverage-corrected residuals r / (1 - h).
double sandwich_sigma(const std::vector<double>& jac, const std::vector<double>& r) {
  double jj = 0.0;
  for (double j : jac) jj += j * j;
  if (!(jj > 0.0)) return 0.0;
  double meat = 0.0;
  for (size_t k = 0; k < r.size(); ++k) {
    const double lever = std::min(jac[k] * jac[k] / jj, 0.99);
    const double rk = r[k] / (1.0 - lever);
    meat += jac[k] * jac[k] * rk * rk;
  }
  return std::sqrt(meat) / jj;
}

// Shared 1-D fitting core: bracketed Brent search, then a local quadratic
// expansion of the RSS for the delta chi^2 = 1 interval.
ThermalFit fit_single_parameter(const ResidualVector& residuals, std::span<const double> data, const FitConfig& cfg) {
  const size_t n_data = data.size();
  if (!(cfg.n_max > 0.0)) throw ConfigError("fit: n_max must be > 0");
  if (n_data < 2) throw ConfigError("fit: need at least 2 data points");
  ThermalFit fit;
  int evals = 0;
  auto eval = [&](double n) {
    ++evals;
    return residuals(std::max(n, 0.0));
  };
  auto rss = [&](double n) { return rss_of(eval(n)); };
  const ScalarMin m = minimize_bounded(rss, 0.0, cfg.n_max, cfg.scan_points, cfg.max_iter);
  fit.iterations = m.iterations;

  double best = m.x;
  const double h_floor = 1e-5 * cfg.n_max;
  if (best <= 10.0 * h_floor && rss(0.0) <= m.f) best = 0.0;
  fit.at_boundary = best == 0.0;
  if (best >= cfg.n_max * (1.0 - 1e-6)) fit.warnings.push_back("best fit at upper bound n_max; widen the search");

  const std::vector<double> r0 = eval(best);
  const double rss_min = rss_of(r0);
  const double sigma2 = rss_min / static_cast<double>(n_data - 1);
  const double h = std::max(1e-3 * best, h_floor);
  std::vector<double> jac(n_data);
  double half_width;
  if (!fit.at_boundary && best - h > 0.0) {
    const std::vector<double> rp = eval(best + h), rm = eval(best - h);
    const double curv = (rss_of(rp) - 2.0 * rss_min + rss_of(rm)) / (h * h);
    for (size_t k = 0; k < n_data; ++k) jac[k] = (rp[k] - rm[k]) / (2.0 * h);
    fit.insensitive = !(curv > 0.0) || !std::isfinite(curv);
    half_width = fit.insensitive ? cfg.n_max : std::sqrt(2.0 * sigma2 / curv);
  } else {
    // One-sided: RSS ~ r0 + s n + c n^2 / 2 from the boundary.
    const std::vector<double> r1 = eval(best + h);
    const double f1 = rss_of(r1), f2 = rss(best + 2.0 * h);
    for (size_t k = 0; k < n_data; ++k) jac[k] = (r1[k] - r0[k]) / h;
    const double c = (f2 - 2.0 * f1 + rss_min) / (h * h);
    const double s = (f1 - rss_min) / h - 0.5 * c * h;
    if (c > 0.0) {
      half_width = (-s + std::sqrt(std::max(s * s + 2.0 * c * sigma2, 0.0))) / c;
    } else if (s > 0.0) {
      half_width = sigma2 / s;
    } else {
      fit.insensitive = true;
      half_width = cfg.n_max;
    }
  }
  if (!fit.insensitive) {
    // Model output unchanged between 0 and n_max: curvature is rounding noise.
    const std::vector<double> lo = eval(0.0), hi = eval(cfg.n_max);
    double moved = 0.0;
    for (size_t k = 0; k < lo.size(); ++k) moved += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    if (std::sqrt(moved) <= 1e-9 * std::max(norm_of(data), 1e-300)) {
      fit.insensitive = true;
      half_width = cfg.n_max;
    }
  }
  if (fit.insensitive) {
    fit.warnings.push_back("misfit is flat in n_th: data insensitive, interval widened");
  } else {
    fit.sigma_curvature = half_width;
    fit.sigma_robust = sandwich_sigma(jac, r0);
    half_width = std::max(half_width, fit.sigma_robust);
  }

  fit.n_th = best;
  fit.sigma = half_width;
  fit.ci_low = std::max(0.0, best - half_width);
  fit.ci_high = best + half_width;
  fit.ci90_low = std::max(0.0, best - 1.645 * half_width);
  fit.ci90_high = best + 1.645 * half_width;
  fit.residual_rms = std::sqrt(rss_min / static_cast<double>(n_data));
  fit.evaluations = evals;
  return fit;
}

void finish(ThermalFit& fit, double nu_ghz) {
  fit.nu_ghz = nu_ghz;
  fit.T_c = fit.n_th > 0.0 ? temperature_from_nth(fit.n_th, nu_ghz) : 0.0;
}

}  // namespace

double nth_from_temperature(double T_kelvin, double nu_ghz) {
  require_positive(T_kelvin, "temperature");
  require_positive(nu_ghz, "frequency");
  return 1.0 / std::expm1(quantum_temperature(nu_ghz) / T_kelvin);
}

double temperature_from_nth(double n_th, double nu_ghz) {
  require_positive(nu_ghz, "frequency");
  if (n_th == 0.0) throw NoFiniteTemperature("n_th = 0 corresponds to no finite temperature");
  require_positive(n_th, "n_th");
  return quantum_temperature(nu_ghz) / std::log1p(1.0 / n_th);
}

ThermalPoint make_thermal_point(double n_th, double nu_ghz, ThermalSource source) {
  return {n_th, temperature_from_nth(n_th, nu_ghz), nu_ghz, source};
}

double nth_from_noise(double s_dbm_hz, double nu_ghz, double n0) {
  require_positive(nu_ghz, "frequency");
  if (!(n0 >= 0.0)) throw ConfigError("background n0 must be >= 0");
  if (std::isnan(s_dbm_hz) || s_dbm_hz == std::numeric_limits<double>::infinity())
    throw ConfigError("noise density must be finite or -inf");
  const double watts_per_hz = std::pow(10.0, (s_dbm_hz - 30.0) / 10.0);
  return watts_per_hz / photon_energy(nu_ghz) + n0;
}

double noise_for_nth(double n_photons, double nu_ghz) {
  require_positive(nu_ghz, "frequency");
  if (!(n_photons >= 0.0)) throw ConfigError("photon number must be >= 0");
  return 10.0 * std::log10(n_photons * photon_energy(nu_ghz)) + 30.0;
}

std::vector<double> model_power(const DeviceParams& p, double n_th, std::span<const double> freqs_ghz,
                                const FitConfig& cfg) {
  const SpaceDims dims = cfg.dims.value_or(SpaceDims(spectral_cavity_levels(cfg.n_max), 3));
  SpectrumOptions so;
  so.parallel = cfg.parallel;
  SpectrumResult s = transmission_spectrum(p, n_th, dims, freqs_ghz, so);
  if (cfg.normalize_to_reference) {
    s = normalize(s, reference_spectrum(p, n_th, dims, freqs_ghz, cfg.reference_detuning, so));
  }
  return s.power_normalized;
}

std::vector<double> model_rabi(const DeviceParams& p, double n_th, std::span<const double> tau_s,
                               const FitConfig& cfg) {
  RabiOptions ro = cfg.rabi;
  const SpaceDims dims = cfg.dims.value_or(SpaceDims(min_cavity_levels(cfg.n_max), 2));
  ro.n_cavity = dims.n_cavity();
  ro.n_transmon = dims.n_transmon();
  ro.evolve.store_states = false;
  const Trajectory t = rabi_sequence(p, n_th, tau_s, cfg.initial, ro);
  return t.observables.at("P_e");
}

ThermalFit fit_nth_spectrum(const SpectrumData& measured, const DeviceParams& p, const FitConfig& cfg) {
  if (measured.freqs_ghz.size() != measured.power.size()) throw DimensionError("spectrum data length mismatch");
  auto residuals = [&](double n) {
    std::vector<double> r = model_power(p, n, measured.freqs_ghz, cfg);
    for (size_t k = 0; k < r.size(); ++k) r[k] -= measured.power[k];
    return r;
  };
  ThermalFit fit = fit_single_parameter(residuals, measured.power, cfg);
  fit.method = ThermalSource::fitted_spectrum;
  finish(fit, p.nu_r.ghz());
  return fit;
}

ThermalFit fit_nth_rabi(const RabiData& measured, const DeviceParams& p, const FitConfig& cfg) {
  if (measured.tau_s.size() != measured.p_e.size()) throw DimensionError("Rabi data length mismatch");
  if (!p.gamma_phi) throw ConfigError("fit_nth_rabi: gamma_phi must be supplied");
  std::vector<double> taus, pe;
  for (size_t k = 0; k < measured.tau_s.size(); ++k) {
    const double t = measured.tau_s[k];
    if (t < cfg.exclude_tau_below || t > cfg.exclude_tau_above) continue;
    taus.push_back(t);
    pe.push_back(measured.p_e[k]);
  }
  if (taus.size() < 2) throw ConfigError("fit_nth_rabi: fewer than 2 samples left after tau cuts");
  auto residuals = [&](double n) {
    std::vector<double> r = model_rabi(p, n, taus, cfg);
    for (size_t k = 0; k < r.size(); ++k) r[k] -= pe[k];
    return r;
  };
  ThermalFit fit = fit_single_parameter(residuals, pe, cfg);
  fit.method = ThermalSource::fitted_rabi;
  finish(fit, p.nu_r.ghz());
  return fit;
}

CalibrationLine calibration_line(std::span<const CalibrationPoint> points, double nu_ghz) {
  if (points.size() < 3) throw ConfigError("calibration_line: need at least 3 points");
  std::set<double> distinct;
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<size_t>(i)];
    const double x = nth_from_noise(pt.s_dbm_hz, nu_ghz, 0.0);
    distinct.insert(x);
    w[i] = pt.sigma > 0.0 ? 1.0 / (pt.sigma * pt.sigma) : 1.0;
    a(i, 0) = 1.0;
    a(i, 1) = x;
    y[i] = pt.n_th;
  }
  if (distinct.size() < 2) throw NumericalError("calibration_line: rank-deficient design (single noise level)");
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd aw = sw.asDiagonal() * a;
  const Eigen::VectorXd yw = sw.asDiagonal() * y;
  const Eigen::Matrix2d normal = aw.transpose() * aw;
  Eigen::FullPivLU<Eigen::Matrix2d> lu(normal);
  if (lu.rank() < 2) throw NumericalError("calibration_line: rank-deficient design");
  const Eigen::Vector2d beta = lu.solve(aw.transpose() * yw);
  CalibrationLine out;
  out.n0 = beta[0];
  out.slope = beta[1];
  const Eigen::VectorXd res = y - a * beta;
  out.residuals.assign(res.data(), res.data() + res.size());
  // Parameter covariance scaled by the reduced chi^2 (n - 2 dof).
  const double chi2 = (sw.asDiagonal() * res).squaredNorm();
  const double scale = n > 2 ? chi2 / static_cast<double>(n - 2) : 0.0;
  const Eigen::Matrix2d cov = lu.inverse() * scale;
  out.n0_sigma = std::sqrt(std::max(cov(0, 0), 0.0));
  out.slope_sigma = std::sqrt(std::max(cov(1, 1), 0.0));
  return out;
}

CalibrationLine calibration_line(std::span<const std::pair<double, ThermalFit>> points, double nu_ghz) {
  std::vector<CalibrationPoint> pts;
  for (const auto& [s, fit] : points) pts.push_back({s, fit.n_th, fit.sigma});
  return calibration_line(std::span<const CalibrationPoint>(pts), nu_ghz);
}

}  // namespace cqed
