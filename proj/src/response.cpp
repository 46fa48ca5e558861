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
#include "cqed/response.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>

#include "cqed/errors.hpp"
#include "cqed/kernels.hpp"
#include "cqed/lsq.hpp"

namespace cqed {

namespace {

void require_increasing(std::span<const double> f) {
  if (f.empty()) throw ConfigError("empty frequency grid");
  for (size_t k = 1; k < f.size(); ++k)
    if (!(f[k] > f[k - 1])) throw ConfigError("frequency grid must be strictly increasing");
}

double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const double mag = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
  return std::round(x * mag) / mag;
}

void add_model_warnings(SpectrumResult& s, const DeviceParams& p, double n_th, SpaceDims dims) {
  if (auto w = truncation_warning(dims.n_cavity(), n_th)) s.warnings.push_back(*w);
  const double bare = bare_cavity_truncation_error(dims.n_cavity(), n_th);
  if (bare > 1e-3) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "cavity truncation %d at n_th = %g distorts the bare-cavity response by %.2g",
                  dims.n_cavity(), n_th, bare);
    s.warnings.emplace_back(buf);
  }
  if (auto w = transmon_frequencies(p.E_C, josephson_energy(p), dims.n_transmon()).warning) s.warnings.push_back(*w);
}

}  // namespace

std::vector<double> linear_grid(double start, double stop, int points) {
  if (points < 2 || !(stop > start)) throw ConfigError("frequency grid needs >= 2 points and stop > start");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) g[k] = start + (stop - start) * k / (points - 1);
  return g;
}

std::vector<double> default_grid(const DeviceParams& p) {
  const double c = p.nu_r.ghz();
  return linear_grid(c - 0.150, c + 0.150, 801);
}

double bare_cavity_truncation_error(int n_cavity, double n_th) {
  if (n_cavity < 2) throw ConfigError("bare cavity check needs at least 2 levels");
  if (!(n_th >= 0.0)) throw ConfigError("n_th must be >= 0");
  // Coherences x_m = X(m+1, m) of the charge +1 sector form a tridiagonal
  // system; rates in units of kappa.
  const int m_max = n_cavity - 1;
  const double down = n_th + 1.0, up = n_th, q = n_th / (n_th + 1.0);
  std::vector<double> pop(static_cast<size_t>(n_cavity));
  double z = 0.0;
  for (int m = 0; m < n_cavity; ++m) z += (pop[static_cast<size_t>(m)] = std::pow(q, m));
  for (double& x : pop) x /= z;
  auto gain_count = [&](int m) { return m < m_max ? m + 1.0 : 0.0; };

  std::vector<double> diag(static_cast<size_t>(m_max)), lower(diag.size()), upper(diag.size()), rhs(diag.size());
  for (int m = 0; m < m_max; ++m) {
    const auto k = static_cast<size_t>(m);
    diag[k] = 0.5 * down * (2.0 * m + 1.0) + 0.5 * up * (gain_count(m + 1) + gain_count(m));
    upper[k] = -down * std::sqrt((m + 2.0) * (m + 1.0));
    lower[k] = -up * std::sqrt((m + 1.0) * m);
    rhs[k] = std::sqrt(m + 1.0) * (pop[k] - pop[k + 1]);
  }
  for (size_t k = 1; k < diag.size(); ++k) {
    const double w = lower[k] / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  std::vector<double> x(diag.size());
  for (size_t k = diag.size(); k-- > 0;) x[k] = (rhs[k] - (k + 1 < diag.size() ? upper[k] * x[k + 1] : 0.0)) / diag[k];
  double amp = 0.0;
  for (size_t k = 0; k < x.size(); ++k) amp += std::sqrt(k + 1.0) * x[k];
  return std::abs(1.0 - 0.5 * amp);
}

int spectral_cavity_levels(double n_th, double tol) {
  if (!(tol > 0.0)) throw ConfigError("truncation tolerance must be > 0");
  constexpr int kCap = 100000;
  for (int n = min_cavity_levels(n_th); n <= kCap; ++n) {
    if (bare_cavity_truncation_error(n, n_th) <= tol) return n;
  }
  throw NumericalError("no cavity truncation up to " + std::to_string(kCap) + " levels reaches tolerance");
}

SpectrumResult transmission_resolvent(const Liouvillian& L, const Operator& a, const DensityMatrix& rho_ss,
                                      std::span<const double> freqs_ghz, const ResolventOptions& opts) {
  require_increasing(freqs_ghz);
  if (!(a.dims() == L.dims()) || !(rho_ss.dims() == L.dims())) throw DimensionError("resolvent: dims differ");
  SpectrumResult out;
  if (L.has_channel("transmon_dephasing")) {
    if (!opts.allow_dephasing)
      throw ConfigError("spectroscopy model excludes qubit dephasing; set the override flag to include it");
    out.paper_model = false;
  }

  const SpaceDims dims = L.dims();
  const Eigen::Index d = dims.total();
  const DenseMat& rho = rho_ss.matrix();
  const DenseMat adag = a.adjoint().dense();
  const DenseMat am = a.dense();
  const DenseMat comm = adag * rho - rho * adag;
  const DenseVec b_full = Eigen::Map<const DenseVec>(comm.data(), comm.size());

  std::vector<Eigen::Index> indices;
  SparseMat block;
  if (L.conserves_excitations()) {
    SectorBlock sec = restrict_to_sector(L, +1);
    indices = std::move(sec.indices);
    block = std::move(sec.block);
  } else {
    indices.resize(static_cast<size_t>(d * d));
    for (Eigen::Index k = 0; k < d * d; ++k) indices[static_cast<size_t>(k)] = k;
    block = L.superop();
  }
  const auto n = static_cast<Eigen::Index>(indices.size());
  DenseVec rhs(n), obs(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const Eigen::Index k = indices[static_cast<size_t>(p)];
    rhs[p] = b_full[k];
    obs[p] = am(k / d, k % d);  // Tr(a X) = sum_ij a_ji X_ij
  }

  const kernels::ShiftedSystem sys(SparseMat(-block));
  const double w_frame = L.frame().rad_per_s();
  std::vector<cplx> shifts(freqs_ghz.size());
  for (size_t k = 0; k < freqs_ghz.size(); ++k)
    shifts[k] = cplx(0.0, -(Frequency::ghz(freqs_ghz[k]).rad_per_s() - w_frame));

  const kernels::SweepResult sweep = opts.parallel ? kernels::resolvent_sweep_parallel(sys, rhs, obs, shifts)
                                                   : kernels::resolvent_sweep_serial(sys, rhs, obs, shifts);
  if (sweep.failed.size() == freqs_ghz.size()) throw NumericalError("resolvent: every frequency point failed");

  out.freqs_ghz.assign(freqs_ghz.begin(), freqs_ghz.end());
  out.method = SpectrumMethod::resolvent;
  out.failed_points = sweep.failed;
  out.amplitude.resize(freqs_ghz.size());
  out.power_normalized.resize(freqs_ghz.size());
  for (size_t k = 0; k < freqs_ghz.size(); ++k) {
    out.amplitude[k] = opts.amplitude_scale * sweep.values[k];
    out.power_normalized[k] = std::norm(out.amplitude[k]);
  }
  for (int k : sweep.failed) out.warnings.push_back("resolvent solve failed at " + std::to_string(freqs_ghz[k]) + " GHz");
  return out;
}

SpectrumResult transmission_spectrum(const DeviceParams& p, double n_th, SpaceDims dims,
                                     std::span<const double> freqs_ghz, const SpectrumOptions& opts) {
  p.validate();
  if (!(p.kappa.rad_per_s() > 0.0)) throw ConfigError("transmission spectra need kappa > 0");
  const Operator h = jc_hamiltonian(p, dims, p.nu_r);
  const bool dephasing = opts.allow_dephasing && p.gamma_phi.has_value();
  const auto channels = collapse_operators(p, n_th, dims, dephasing);
  const Liouvillian L = build_liouvillian(h, channels, "jc", p.nu_r);
  const DensityMatrix rho = steady_state(L);
  ResolventOptions ro;
  ro.amplitude_scale = 0.5 * p.kappa.rad_per_s();
  ro.parallel = opts.parallel;
  ro.allow_dephasing = opts.allow_dephasing;
  SpectrumResult s = transmission_resolvent(L, annihilation(dims), rho, freqs_ghz, ro);
  s.params = p;
  s.n_th = n_th;
  add_model_warnings(s, p, n_th, dims);
  return s;
}

SpectrumResult reference_spectrum(const DeviceParams& p, double n_th, SpaceDims dims,
                                  std::span<const double> freqs_ghz, Frequency reference_detuning,
                                  const SpectrumOptions& opts) {
  DeviceParams detuned = p;
  detuned.detuning = reference_detuning;
  return transmission_spectrum(detuned, n_th, dims, freqs_ghz, opts);
}

SpectrumResult transmission_weak_drive(const DeviceParams& p, double n_th, SpaceDims dims,
                                       std::span<const double> freqs_ghz, Frequency epsilon,
                                       const SpectrumOptions& opts) {
  p.validate();
  require_increasing(freqs_ghz);
  if (!(p.kappa.rad_per_s() > 0.0)) throw ConfigError("transmission spectra need kappa > 0");
  if (!(epsilon.rad_per_s() > 0.0)) throw ConfigError("drive amplitude must be > 0");
  const bool dephasing = opts.allow_dephasing && p.gamma_phi.has_value();
  const auto channels = collapse_operators(p, n_th, dims, dephasing);
  const Operator a = annihilation(dims);
  const double eps = epsilon.rad_per_s();
  const double half_kappa = 0.5 * p.kappa.rad_per_s();

  // L(probe) = L_0 + (omega_r - omega_p) C_N + eps C_drive, with L_0 in the
  // frame of the bare cavity and C_X = -i (I (x) X - X^T (x) I).
  const Liouvillian base = build_liouvillian(jc_hamiltonian(p, dims, p.nu_r), channels, "jc", p.nu_r);
  const SparseMat id = sparse_identity(dims.total());
  auto commutator = [&](const SparseMat& x) {
    return SparseMat(cplx(0.0, -1.0) * (kron(id, x) - kron(SparseMat(x.transpose()), id)));
  };
  const SparseMat c_number = commutator(excitation_number(dims).matrix());
  const SparseMat c_drive = commutator(SparseMat(a.matrix() + SparseMat(a.matrix().adjoint())));
  const SparseMat driven = base.superop() + eps * c_drive;

  SpectrumResult out;
  out.freqs_ghz.assign(freqs_ghz.begin(), freqs_ghz.end());
  out.method = SpectrumMethod::weak_drive;
  out.params = p;
  out.n_th = n_th;
  out.paper_model = !dephasing;
  out.amplitude.resize(freqs_ghz.size());
  out.power_normalized.resize(freqs_ghz.size());

  const long n = static_cast<long>(freqs_ghz.size());
  std::exception_ptr failure;
  double max_photons = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : max_photons) if (opts.parallel)
  for (long k = 0; k < n; ++k) {
    try {
      const Frequency probe = Frequency::ghz(freqs_ghz[k]);
      const double delta = p.nu_r.rad_per_s() - probe.rad_per_s();
      const Liouvillian L(dims, SparseMat(driven + delta * c_number), base.provenance(), "jc_driven", probe);
      const DensityMatrix rho = steady_state(L);
      const cplx alpha = rho.expect(a);
      out.amplitude[k] = cplx(0.0, 1.0) * alpha * half_kappa / eps;
      out.power_normalized[k] = std::norm(out.amplitude[k]);
      max_photons = std::max(max_photons, std::norm(alpha));
    } catch (...) {
#pragma omp critical(weak_drive_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (max_photons > 0.1) {
    out.warnings.push_back("probe population " + std::to_string(max_photons) +
                           " photons exceeds 0.1: outside linear response");
  }
  add_model_warnings(out, p, n_th, dims);
  return out;
}

double max_probe_photons(const SpectrumResult& weak, Frequency epsilon) {
  if (!weak.params) throw ConfigError("weak-drive result carries no parameters");
  const double factor = epsilon.rad_per_s() / (0.5 * weak.params->kappa.rad_per_s());
  double m = 0.0;
  for (const cplx& amp : weak.amplitude) m = std::max(m, std::norm(amp * factor));
  return m;
}

SpectrumResult normalize(const SpectrumResult& spectrum, const SpectrumResult& reference) {
  if (spectrum.freqs_ghz != reference.freqs_ghz) throw ConfigError("normalize: frequency grids differ");
  double ref_max = 0.0;
  for (const cplx& a : reference.amplitude) ref_max = std::max(ref_max, std::norm(a));
  if (!(ref_max > 0.0)) throw NumericalError("normalize: reference spectrum has zero power");
  SpectrumResult out = spectrum;
  for (size_t k = 0; k < out.amplitude.size(); ++k) out.power_normalized[k] = std::norm(out.amplitude[k]) / ref_max;
  return out;
}

LorentzianFit fit_lorentzian(std::span<const double> freqs_ghz, std::span<const double> power) {
  if (freqs_ghz.size() != power.size()) throw DimensionError("fit_lorentzian: length mismatch");
  if (freqs_ghz.size() < 10) throw ConfigError("fit_lorentzian: need at least 10 points");
  require_increasing(freqs_ghz);
  const auto n = static_cast<Eigen::Index>(power.size());

  const auto peak_it = std::max_element(power.begin(), power.end());
  const auto ipk = static_cast<size_t>(peak_it - power.begin());
  const double base0 = *std::min_element(power.begin(), power.end());
  const double amp0 = *peak_it - base0;
  if (!(amp0 > 1e-14 * std::max(std::abs(*peak_it), 1e-300)) || !std::isfinite(amp0))
    throw NumericalError("fit_lorentzian: degenerate (flat) data");

  const double half = base0 + 0.5 * amp0;
  auto crossing = [&](int dir) -> std::optional<double> {
    for (long i = static_cast<long>(ipk); i + dir >= 0 && i + dir < static_cast<long>(power.size()); i += dir) {
      const double p0 = power[i], p1 = power[i + dir];
      if (p1 < half) {
        const double frac = (p0 - half) / (p0 - p1);
        return freqs_ghz[i] + frac * (freqs_ghz[i + dir] - freqs_ghz[i]);
      }
    }
    return std::nullopt;
  };
  const auto left = crossing(-1), right = crossing(+1);
  const double span = freqs_ghz.back() - freqs_ghz.front();
  double w0;
  if (left && right) {
    w0 = *right - *left;
  } else if (left) {
    w0 = 2.0 * (freqs_ghz[ipk] - *left);
  } else if (right) {
    w0 = 2.0 * (*right - freqs_ghz[ipk]);
  } else {
    w0 = span / 4.0;
  }
  if (!(w0 > 0.0)) w0 = span / 4.0;
  if (span < 3.0 * w0) throw ConfigError("fit_lorentzian: grid spans fewer than 3 linewidths");

  // Work in units of the initial width around the peak for conditioning.
  const double nu_ref = freqs_ghz[ipk];
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = (freqs_ghz[i] - nu_ref) / w0;
    y[i] = power[i];
  }
  auto residuals = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
    const double hw2 = 0.25 * q[2] * q[2];
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dx = x[i] - q[1];
      r[i] = q[0] * hw2 / (dx * dx + hw2) + q[3] - y[i];
    }
    return r;
  };
  Eigen::VectorXd q0(4);
  q0 << amp0, 0.0, 1.0, base0;
  const LsqResult r = levenberg_marquardt(residuals, q0);

  LorentzianFit fit;
  fit.peak = r.params[0];
  fit.center_ghz = nu_ref + r.params[1] * w0;
  fit.fwhm_mhz = std::abs(r.params[2]) * w0 * 1e3;
  fit.baseline = r.params[3];
  fit.converged = r.converged;
  fit.residual_norm = std::sqrt(r.rss / static_cast<double>(n));
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  fit.r2 = sst > 0.0 ? 1.0 - r.rss / sst : 1.0;
  fit.lorentzian = fit.r2 >= 0.9;
  if (!std::isfinite(fit.residual_norm)) throw NumericalError("fit_lorentzian: non-finite residual");
  return fit;
}

LorentzianFit fit_lorentzian(const SpectrumResult& spectrum) {
  return fit_lorentzian(spectrum.freqs_ghz, spectrum.power_normalized);
}

ClassicalityReport classicality_report(const DeviceParams& p, double n_th) {
  if (!(n_th >= 0.0)) throw ConfigError("n_th must be >= 0");
  const double g = p.g_ge.rad_per_s();
  const double kappa = p.kappa.rad_per_s();
  ClassicalityReport r;
  r.n_th = n_th;
  r.threshold = (g / kappa) * (g / kappa);
  r.threshold_rounded = round_sig(r.threshold, 2);
  r.classical = n_th > r.threshold;
  r.dissipation_ratio = n_th > 0.0 ? std::sqrt(n_th) * g / (n_th * kappa) : std::numeric_limits<double>::infinity();
  r.nonlinearity_ratio = 2.0 * g * (std::sqrt(n_th + 1.0) - std::sqrt(n_th)) / kappa;
  r.note =
      "sqrt(n) g < n kappa and 2 g (sqrt(n+1) - sqrt(n)) < kappa both reduce to n > (g/kappa)^2 for large n";
  return r;
}

}  // namespace cqed
