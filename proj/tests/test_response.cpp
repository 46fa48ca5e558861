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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "cqed/errors.hpp"
#include "cqed/response.hpp"

using namespace cqed;

namespace {

DeviceParams resonant() {
  DeviceParams p;
  p.detuning = Frequency::ghz(0.0);
  return p;
}

// Local maxima above a threshold, as (frequency, power) pairs.
std::vector<std::pair<double, double>> peaks(const SpectrumResult& s, double threshold) {
  std::vector<std::pair<double, double>> out;
  const auto& y = s.power_normalized;
  for (size_t k = 1; k + 1 < y.size(); ++k)
    if (y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] > threshold) out.emplace_back(s.freqs_ghz[k], y[k]);
  return out;
}

LorentzianFit fit_window(const SpectrumResult& s, double lo, double hi) {
  std::vector<double> f, y;
  for (size_t k = 0; k < s.freqs_ghz.size(); ++k) {
    if (s.freqs_ghz[k] >= lo && s.freqs_ghz[k] <= hi) {
      f.push_back(s.freqs_ghz[k]);
      y.push_back(s.power_normalized[k]);
    }
  }
  return fit_lorentzian(f, y);
}

}  // namespace

TEST(Grid, LinearAndDefault) {
  const auto g = linear_grid(1.0, 2.0, 5);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[2], 1.5);
  const auto d = default_grid(DeviceParams{});
  EXPECT_EQ(d.size(), 801u);
  EXPECT_NEAR(d.front(), 6.29, 1e-12);
  EXPECT_NEAR(d.back(), 6.59, 1e-12);
  EXPECT_THROW(linear_grid(2.0, 1.0, 5), ConfigError);
}

TEST(Resolvent, EmptyCavityLorentzian) {
  DeviceParams p;
  p.g_ge = Frequency();
  const auto f = linear_grid(6.42, 6.46, 401);
  const SpectrumResult s = transmission_spectrum(p, 0.0, SpaceDims(4, 2), f);
  const LorentzianFit fit = fit_lorentzian(s);
  EXPECT_NEAR(fit.fwhm_mhz, 3.2, 0.032);
  EXPECT_NEAR(fit.center_ghz, 6.44, 1e-9);
  EXPECT_NEAR(fit.peak, 1.0, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  for (size_t k = 0; k < f.size(); ++k) {
    const double delta = (f[k] - 6.44) * 1e3;
    EXPECT_NEAR(s.power_normalized[k], 1.0 / (1.0 + std::pow(2.0 * delta / 3.2, 2)), 1e-10);
  }
}

TEST(Resolvent, VacuumRabiDoubletAtLowOccupation) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.37, 6.51, 1401);
  const SpectrumResult cold = transmission_spectrum(p, 0.0, SpaceDims(12, 3), f);
  const SpectrumResult s = transmission_spectrum(p, 0.05, SpaceDims(12, 3), f);
  const auto pk = peaks(s, 0.1);
  ASSERT_EQ(pk.size(), 2u);
  EXPECT_NEAR(pk[0].first, 6.44 - 0.054, 1e-3);
  EXPECT_NEAR(pk[1].first, 6.44 + 0.054, 1e-3);
  for (double center : {6.386, 6.494}) {
    // Polariton linewidth (kappa + gamma) / 2 in the vacuum, broadened by
    // thermal photon jumps once n_th > 0.
    const LorentzianFit lf0 = fit_window(cold, center - 0.006, center + 0.006);
    const LorentzianFit lf = fit_window(s, center - 0.006, center + 0.006);
    EXPECT_NEAR(lf0.fwhm_mhz, 1.9, 0.019) << center;
    EXPECT_GT(lf.fwhm_mhz, lf0.fwhm_mhz + 0.2) << center;
    EXPECT_LT(lf.peak, lf0.peak);
    EXPECT_LT(lf0.peak, 1.0);
  }
}

TEST(Resolvent, MatchesDenseFixture) {
  // numpy dense resolvent, 4 x 3 levels, n_th = 0.3, device values.
  const DeviceParams p = resonant();
  const std::vector<double> f{6.386, 6.40, 6.44, 6.494, 6.5};
  const std::vector<cplx> expected{{0.179844163499108, -0.0277717461266178},
                                   {0.0099127484547275, 0.00774119139653007},
                                   {0.0078743765810792, 0.00920327472761692},
                                   {0.180656825442877, 0.0419891754361188},
                                   {0.0209699754404506, 0.0796679545808384}};
  const SpectrumResult s = transmission_spectrum(p, 0.3, SpaceDims(4, 3), f);
  for (size_t k = 0; k < f.size(); ++k) EXPECT_LT(std::abs(s.amplitude[k] - expected[k]), 1e-9) << f[k];
}

TEST(Resolvent, SerialAndParallelSweepsAgree) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.3, 6.6, 97);
  SpectrumOptions serial;
  serial.parallel = false;
  const SpectrumResult a = transmission_spectrum(p, 0.4, SpaceDims(8, 3), f, serial);
  const SpectrumResult b = transmission_spectrum(p, 0.4, SpaceDims(8, 3), f);
  for (size_t k = 0; k < f.size(); ++k) EXPECT_EQ(a.amplitude[k], b.amplitude[k]);
}

TEST(Resolvent, PositiveAndFiniteEverywhere) {
  const DeviceParams p = resonant();
  const SpectrumResult s = transmission_spectrum(p, 2.0, SpaceDims(20, 3), default_grid(p));
  EXPECT_TRUE(s.failed_points.empty());
  for (double y : s.power_normalized) {
    EXPECT_TRUE(std::isfinite(y));
    EXPECT_GE(y, 0.0);
  }
}

TEST(Resolvent, SymmetricAboutCavityForTwoLevelQubit) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.34, 6.54, 201);
  const SpectrumResult s = transmission_spectrum(p, 0.5, SpaceDims(10, 2), f);
  const double peak = *std::max_element(s.power_normalized.begin(), s.power_normalized.end());
  for (size_t k = 0; k < f.size(); ++k) {
    EXPECT_NEAR(s.power_normalized[k], s.power_normalized[f.size() - 1 - k], 1e-6 * peak);
  }
}

TEST(Resolvent, SecondRungTransitionsAppearWithThermalPhotons) {
  const DeviceParams p = resonant();
  const DressedLevels dl = dressed_levels(p, 3, 6);
  std::vector<double> lines;
  for (const auto& t : dl.transitions)
    if (t.from_n <= 1 && t.strength > 0.1) lines.push_back(t.freq_ghz);
  const auto f = linear_grid(6.29, 6.59, 1201);
  for (double n_th : {0.1, 0.5}) {
    const SpectrumResult s = transmission_spectrum(p, n_th, SpaceDims(min_cavity_levels(n_th), 6), f);
    std::vector<double> sorted = s.power_normalized;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const auto pk = peaks(s, 3.0 * sorted[sorted.size() / 2]);
    for (int label : {-1, +1}) {
      const double nu = dl.transition(1, label, 2, label);
      // Overlapping thermally broadened lines pull the maxima by a few MHz at
      // n_th = 0.5, so a peak is assigned to its nearest predicted line.
      const bool found = std::any_of(pk.begin(), pk.end(), [&](auto pr) {
        const double nearest = *std::min_element(lines.begin(), lines.end(), [&](double x, double y) {
          return std::abs(x - pr.first) < std::abs(y - pr.first);
        });
        const double tol = n_th < 0.2 ? 1.5e-3 : 5e-3;
        return nearest == nu && std::abs(pr.first - nu) < tol;
      });
      EXPECT_TRUE(found) << "missing transition at " << nu << " GHz, n_th = " << n_th;
    }
  }
}

TEST(Resolvent, DephasingRejectedUnlessOverridden) {
  DeviceParams p = resonant();
  p.gamma_phi = Frequency::mhz(0.5);
  const auto f = linear_grid(6.4, 6.5, 11);
  SpectrumOptions o;
  o.allow_dephasing = true;
  const SpectrumResult s = transmission_spectrum(p, 0.1, SpaceDims(4, 2), f, o);
  EXPECT_FALSE(s.paper_model);

  const SpaceDims d(4, 2);
  const Liouvillian L = build_liouvillian(jc_hamiltonian(p, d, p.nu_r), collapse_operators(p, 0.1, d, true), "jc",
                                          p.nu_r);
  const DensityMatrix rho = steady_state(L);
  EXPECT_THROW(transmission_resolvent(L, annihilation(d), rho, f), ConfigError);
}

TEST(WeakDrive, ConvergesQuadraticallyToLinearResponse) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.38, 6.50, 25);
  const SpaceDims d(6, 2);
  const SpectrumResult r = transmission_spectrum(p, 0.1, d, f);
  auto deviation = [&](double eps_mhz) {
    const SpectrumResult w = transmission_weak_drive(p, 0.1, d, f, Frequency::mhz(eps_mhz));
    double m = 0.0;
    for (size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(w.power_normalized[k] - r.power_normalized[k]));
    return m;
  };
  const double d1 = deviation(0.01), d2 = deviation(0.02), d4 = deviation(0.04);
  EXPECT_LT(d1, 2e-5);
  EXPECT_NEAR(d2 / d1, 4.0, 0.2);
  EXPECT_NEAR(d4 / d2, 4.0, 0.2);
  const SpectrumResult b = transmission_weak_drive(p, 0.1, d, f, Frequency::mhz(0.04));
  EXPECT_LT(max_probe_photons(b, Frequency::mhz(0.04)), 0.01);
}

TEST(WeakDrive, AgreesWithResolvent) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.36, 6.52, 81);
  const SpaceDims d(8, 3);
  const SpectrumResult r = transmission_spectrum(p, 0.3, d, f);
  const SpectrumResult w = transmission_weak_drive(p, 0.3, d, f, Frequency::mhz(0.16));
  double acc = 0.0, peak = 0.0;
  for (size_t k = 0; k < f.size(); ++k) {
    acc += std::pow(r.power_normalized[k] - w.power_normalized[k], 2);
    peak = std::max(peak, r.power_normalized[k]);
  }
  EXPECT_LT(std::sqrt(acc / f.size()) / peak, 0.01);
}

TEST(WeakDrive, StrongProbeWarns) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.43, 6.45, 3);
  p.validate();
  DeviceParams empty = p;
  empty.g_ge = Frequency();
  const SpectrumResult s = transmission_weak_drive(empty, 0.0, SpaceDims(12, 2), f, Frequency::mhz(1.0));
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Detuned, QubitFarDetunedGivesBareCavityLine) {
  DeviceParams p;
  p.detuning = Frequency::ghz(0.5);
  const auto f = linear_grid(6.41, 6.46, 501);
  const SpectrumResult s = transmission_spectrum(p, 0.05, SpaceDims(10, 3), f);
  const LorentzianFit lf = fit_lorentzian(s);
  EXPECT_NEAR(lf.fwhm_mhz, 3.2, 0.02 * 3.2);
  EXPECT_NEAR(lf.peak, 1.0, 0.02);
  EXPECT_GT(lf.r2, 0.999);
  // Dispersive pull of the line towards lower frequency, about g^2/Delta.
  EXPECT_NEAR(6.44 - lf.center_ghz, 0.054 * 0.054 / 0.5, 1e-3);
}

TEST(Normalize, SelfNormalizationAndGridMismatch) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.3, 6.6, 61);
  const SpaceDims d(10, 3);
  const SpectrumResult ref = reference_spectrum(p, 0.05, d, f, Frequency::ghz(-2.0));
  const SpectrumResult self = normalize(ref, ref);
  EXPECT_DOUBLE_EQ(*std::max_element(self.power_normalized.begin(), self.power_normalized.end()), 1.0);
  const SpectrumResult other = reference_spectrum(p, 0.05, d, linear_grid(6.3, 6.6, 31), Frequency::ghz(-2.0));
  EXPECT_THROW(normalize(ref, other), ConfigError);
}

TEST(Normalize, SplitPeaksStayBelowReference) {
  const DeviceParams p = resonant();
  const auto f = linear_grid(6.37, 6.51, 701);
  const SpaceDims d(10, 3);
  const SpectrumResult s =
      normalize(transmission_spectrum(p, 0.05, d, f), reference_spectrum(p, 0.05, d, f, Frequency::ghz(-2.0)));
  const double top = *std::max_element(s.power_normalized.begin(), s.power_normalized.end());
  EXPECT_LT(top, 0.5);
  EXPECT_GT(top, 0.2);
}

TEST(Normalize, ClassicalLimitPeakApproachesReference) {
  DeviceParams p = resonant();
  p.g_ge = Frequency::mhz(6.4);
  const auto f = linear_grid(6.40, 6.48, 321);
  const SpaceDims d(200, 2);
  const SpectrumResult s =
      normalize(transmission_spectrum(p, 16.0, d, f), reference_spectrum(p, 16.0, d, f, Frequency::ghz(-2.0)));
  const double top = *std::max_element(s.power_normalized.begin(), s.power_normalized.end());
  EXPECT_GT(top, 0.7);
  EXPECT_LT(top, 1.0);
}

TEST(Lorentzian, ExactInputIsFixedPoint) {
  const auto f = linear_grid(6.40, 6.48, 201);
  std::vector<double> y;
  for (double v : f) {
    const double hw = 0.5 * 3.7e-3;
    y.push_back(0.8 * hw * hw / ((v - 6.4412) * (v - 6.4412) + hw * hw) + 0.01);
  }
  const LorentzianFit lf = fit_lorentzian(f, y);
  EXPECT_NEAR(lf.center_ghz, 6.4412, 6.4412 * 1e-9);
  EXPECT_NEAR(lf.fwhm_mhz, 3.7, 3.7 * 1e-9);
  EXPECT_NEAR(lf.peak, 0.8, 0.8 * 1e-9);
  EXPECT_NEAR(lf.baseline, 0.01, 1e-9);
  EXPECT_TRUE(lf.lorentzian);
}

TEST(Lorentzian, DoubletIsNotLorentzian) {
  const DeviceParams p = resonant();
  const SpectrumResult s = transmission_spectrum(p, 0.05, SpaceDims(12, 3), linear_grid(6.29, 6.59, 801));
  const LorentzianFit lf = fit_lorentzian(s);
  EXPECT_LT(lf.r2, 0.9);
  EXPECT_FALSE(lf.lorentzian);
}

TEST(Lorentzian, InputValidation) {
  const auto f = linear_grid(1.0, 2.0, 20);
  EXPECT_THROW(fit_lorentzian(f, std::vector<double>(20, 0.5)), NumericalError);
  EXPECT_THROW(fit_lorentzian(linear_grid(1.0, 2.0, 5), std::vector<double>(5, 0.5)), ConfigError);
  std::vector<double> narrow_grid_wide_line;
  for (double v : f) narrow_grid_wide_line.push_back(1.0 / (1.0 + (v - 1.5) * (v - 1.5)));
  EXPECT_THROW(fit_lorentzian(f, narrow_grid_wide_line), ConfigError);
}

TEST(Classicality, ThresholdAndRatios) {
  const DeviceParams p;
  const ClassicalityReport r = classicality_report(p, 370.0);
  EXPECT_NEAR(r.threshold, 284.765625, 1e-9);
  EXPECT_EQ(r.threshold_rounded, 280.0);
  EXPECT_TRUE(r.classical);
  const ClassicalityReport one = classicality_report(p, 1.0);
  EXPECT_FALSE(one.classical);
  EXPECT_NEAR(one.nonlinearity_ratio, 2.0 * 54.0 * (std::sqrt(2.0) - 1.0) / 3.2, 1e-9);
  EXPECT_NEAR(one.nonlinearity_ratio, 14.0, 0.1);
  EXPECT_TRUE(std::isinf(classicality_report(p, 0.0).dissipation_ratio));
  EXPECT_FALSE(classicality_report(p, 0.0).classical);
}

TEST(Truncation, BareCavityCheckMatchesFullModel) {
  DeviceParams p = resonant();
  p.g_ge = Frequency();
  const std::vector<double> f{6.44};
  for (auto [nc, n_th] : {std::pair{10, 1.0}, std::pair{20, 1.0}, std::pair{30, 4.0}}) {
    const SpectrumResult s = transmission_spectrum(p, n_th, SpaceDims(nc, 2), f);
    EXPECT_NEAR(bare_cavity_truncation_error(nc, n_th), std::abs(1.0 - std::abs(s.amplitude[0])), 1e-10)
        << nc << " levels, n_th = " << n_th;
  }
}

TEST(Truncation, SpectralLevelsMeetTolerance) {
  EXPECT_EQ(spectral_cavity_levels(0.0), min_cavity_levels(0.0));
  for (double n_th : {0.3, 1.0, 4.0, 16.0}) {
    const int n = spectral_cavity_levels(n_th);
    EXPECT_GE(n, min_cavity_levels(n_th));
    EXPECT_LE(bare_cavity_truncation_error(n, n_th), 1e-4);
    EXPECT_GT(bare_cavity_truncation_error(n - 1, n_th), 1e-4);
  }
  EXPECT_EQ(spectral_cavity_levels(16.0), 252);
}

TEST(Truncation, UnderResolvedSpectrumWarns) {
  const DeviceParams p = resonant();
  const SpectrumResult s = transmission_spectrum(p, 1.0, SpaceDims(10, 2), std::vector<double>{6.44});
  const bool warned = std::any_of(s.warnings.begin(), s.warnings.end(),
                                  [](const std::string& w) { return w.find("bare-cavity") != std::string::npos; });
  EXPECT_TRUE(warned);
}
