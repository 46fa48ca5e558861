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

#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "cqed/device.hpp"
#include "cqed/errors.hpp"

using namespace cqed;

namespace {

DeviceParams two_level_resonant() {
  DeviceParams p;
  p.detuning = Frequency::ghz(0.0);
  return p;
}

}  // namespace

TEST(Flux, JosephsonEnergy) {
  EXPECT_DOUBLE_EQ(ej_of_flux(Frequency::ghz(14.4), 0.0).ghz(), 14.4);
  EXPECT_NEAR(ej_of_flux(Frequency::ghz(14.4), 0.5).ghz(), 0.0, 1e-12);
  EXPECT_NEAR(ej_of_flux(Frequency::ghz(14.4), 0.1864).ghz(), 12.0, 0.05);
}

TEST(Flux, PeriodicAndEven) {
  for (double x : {0.1, 0.27, 0.33, 0.71}) {
    const double f = ej_of_flux(Frequency::ghz(14.4), x).ghz();
    EXPECT_NEAR(f, ej_of_flux(Frequency::ghz(14.4), x + 1.0).ghz(), 1e-12);
    EXPECT_EQ(f, ej_of_flux(Frequency::ghz(14.4), -x).ghz());
  }
}

TEST(Flux, ResonantFluxFromDetuning) {
  // Bisection reference: E_J = 11.9998416334661 GHz at flux 0.18643583153084.
  DeviceParams p;
  p.detuning = Frequency::ghz(0.0);
  EXPECT_NEAR(josephson_energy(p).ghz(), 11.9998416334661, 1e-9);
  EXPECT_NEAR(effective_flux(p), 0.18643583153084, 1e-9);
  p.detuning = Frequency::ghz(1.0);
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Transmon, LevelsAndAnharmonicity) {
  const TransmonLevels two = transmon_frequencies(Frequency::ghz(0.502), Frequency::ghz(14.4), 2);
  EXPECT_NEAR(two.levels[1].ghz(), 7.103, 1e-3);
  EXPECT_NEAR(two.levels[1].ghz(), 7.10263017, 1e-8);
  EXPECT_FALSE(two.warning.has_value());
  const TransmonLevels three = transmon_frequencies(Frequency::ghz(0.502), Frequency::ghz(14.4), 3);
  const double ge = (three.levels[1] - three.levels[0]).ghz();
  const double ef = (three.levels[2] - three.levels[1]).ghz();
  EXPECT_NEAR(ef, ge - 0.502, 1e-12);
  EXPECT_NEAR(three.levels[2].ghz(), 13.70326034, 1e-8);
  EXPECT_THROW(transmon_frequencies(Frequency::ghz(0.5), Frequency::ghz(14.0), 1), ConfigError);
}

TEST(Transmon, LeadingTermScalesAsSqrtOfEnergyScale) {
  // With E_C fixed and E_J -> s E_J the plasma term scales as sqrt(s).
  const auto a = transmon_frequencies(Frequency::ghz(0.3), Frequency::ghz(10.0), 2).levels[1].ghz() + 0.3;
  const auto b = transmon_frequencies(Frequency::ghz(0.3), Frequency::ghz(40.0), 2).levels[1].ghz() + 0.3;
  EXPECT_NEAR(b / a, 2.0, 1e-12);
}

TEST(Transmon, LowRatioWarns) {
  EXPECT_TRUE(transmon_frequencies(Frequency::ghz(1.0), Frequency::ghz(10.0), 3).warning.has_value());
}

TEST(Hamiltonian, HermitianAndConservesExcitations) {
  DeviceParams p;
  const SpaceDims d(6, 4);
  const Operator h = jc_hamiltonian(p, d);
  const Operator n = excitation_number(d);
  EXPECT_EQ(h.unit(), Unit::angular_frequency);
  EXPECT_EQ((h.matrix() - SparseMat(h.matrix().adjoint())).norm(), 0.0);
  const DenseMat c = h.dense() * n.dense() - n.dense() * h.dense();
  EXPECT_LT(c.cwiseAbs().maxCoeff(), 1e-12 * h.dense().cwiseAbs().maxCoeff());
}

TEST(Hamiltonian, VacuumRabiDoublet) {
  const DeviceParams p = two_level_resonant();
  const SpaceDims d(3, 2);
  const DenseMat h = jc_hamiltonian(p, d).dense() / (2.0 * M_PI * 1e9);
  // n = 1 block: |e,0> (index 1) and |g,1> (index 2).
  Eigen::Matrix2cd blk;
  blk << h(1, 1), h(1, 2), h(2, 1), h(2, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(blk);
  EXPECT_NEAR(es.eigenvalues()[0], 6.44 - 0.054, 1e-9);
  EXPECT_NEAR(es.eigenvalues()[1], 6.44 + 0.054, 1e-9);
}

TEST(Hamiltonian, UncoupledSpectrumIsSumOfBareEnergies) {
  DeviceParams p;
  p.g_ge = Frequency();
  const SpaceDims d(4, 3);
  const DenseMat h = jc_hamiltonian(p, d).dense();
  const auto lv = transmon_frequencies(p.E_C, josephson_energy(p), 3).levels;
  for (int i = 0; i < d.total(); ++i) {
    const double expected = p.nu_r.rad_per_s() * d.fock(i) + lv[d.level(i)].rad_per_s();
    EXPECT_NEAR(h(i, i).real(), expected, 1e-3);
  }
  EXPECT_EQ(h.cwiseAbs().sum(), h.diagonal().cwiseAbs().sum());
}

TEST(Hamiltonian, RotatingFrameSubtractsExcitationNumber) {
  const DeviceParams p = two_level_resonant();
  const SpaceDims d(4, 2);
  const DenseMat lab = jc_hamiltonian(p, d).dense();
  const DenseMat rot = jc_hamiltonian(p, d, p.nu_r).dense();
  const DenseMat diff = lab - rot - p.nu_r.rad_per_s() * excitation_number(d).dense();
  EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Collapse, RatesFollowOccupation) {
  const DeviceParams p;
  const SpaceDims d(4, 3);
  const double k = p.kappa.rad_per_s();
  const auto c0 = collapse_operators(p, 0.0, d, false);
  ASSERT_EQ(c0.size(), 3u);
  EXPECT_EQ(c0[1].rate, 0.0);
  const auto c = collapse_operators(p, 0.04, d, false);
  EXPECT_NEAR(c[0].rate, 1.04 * k, 1e-12 * k);
  EXPECT_NEAR(c[1].rate, 0.04 * k, 1e-12 * k);
  EXPECT_NEAR(c[2].rate, p.gamma.rad_per_s(), 1e-12);
  for (double n : {0.3, 2.0, 17.5}) {
    const auto cn = collapse_operators(p, n, d, false);
    EXPECT_NEAR(cn[0].rate - c0[0].rate, cn[1].rate, 1e-12 * k * n);
  }
  EXPECT_THROW(collapse_operators(p, -0.1, d, false), ConfigError);
}

TEST(Collapse, SingleWeightedTransmonChannel) {
  const DeviceParams p;
  const SpaceDims d(2, 4);
  const auto c = collapse_operators(p, 0.1, d, false);
  const DenseMat s = c[2].op.dense();
  EXPECT_NEAR(s(1, 2).real(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s(2, 3).real(), std::sqrt(3.0), 1e-15);
}

TEST(Collapse, DephasingNeedsExplicitRate) {
  DeviceParams p;
  const SpaceDims d(3, 3);
  EXPECT_THROW(collapse_operators(p, 0.1, d, true), ConfigError);
  p.gamma_phi = Frequency::mhz(0.25);
  const auto c = collapse_operators(p, 0.1, d, true);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[3].name, "transmon_dephasing");
  EXPECT_EQ(c[3].op.dense()(2, 2).real(), 2.0);
}

TEST(DressedLevels, SqrtNLadder) {
  const DeviceParams p = two_level_resonant();
  const DressedLevels dl = dressed_levels(p, 10);
  for (int n = 1; n <= 10; ++n) {
    EXPECT_NEAR(dl.doublet_split[n] / dl.doublet_split[1], std::sqrt(n), 1e-9 * std::sqrt(n));
    EXPECT_NEAR(dl.doublet_split[n] / (2.0 * p.g_ge.rad_per_s()), std::sqrt(n), 1e-9 * std::sqrt(n));
  }
  EXPECT_NEAR(dl.transition(0, 0, 1, -1), 6.44 - 0.054, 1e-9);
  EXPECT_NEAR(dl.transition(0, 0, 1, +1), 6.44 + 0.054, 1e-9);
}

TEST(DressedLevels, HighLadderTransitionsApproachCavity) {
  const DeviceParams p = two_level_resonant();
  const DressedLevels dl = dressed_levels(p, 60);
  double prev = 1e9;
  for (int n : {5, 15, 30, 59}) {
    const double gap = std::abs(dl.transition(n, +1, n + 1, +1) - 6.44);
    EXPECT_NEAR(gap, 0.054 * (std::sqrt(n + 1.0) - std::sqrt(n)), 1e-9);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(DressedLevels, DispersiveLimit) {
  // Two-level qubit 0.5 GHz above the cavity: dense 2x2 reference gives
  // |g,1> at 6.43423448 GHz, shift g^2/Delta = 5.832 MHz.
  DeviceParams p;
  p.detuning = Frequency::ghz(0.5);
  const DressedLevels dl = dressed_levels(p, 2);
  const auto& blk = dl.blocks[1];
  EXPECT_NEAR(blk[0].freq_ghz, 6.43423448, 1e-8);
  EXPECT_NEAR(6.44 - blk[0].freq_ghz, 0.054 * 0.054 / 0.5, 0.054 * 0.054 / 0.5 * (0.054 / 0.5));
}

TEST(DressedLevels, MultiLevelRungTwoTransitions) {
  DeviceParams p = two_level_resonant();
  const DressedLevels dl = dressed_levels(p, 3, 6);
  // Dense numpy diagonalization of the rung-2 block {|g,2>, |e,1>, |f,0>}
  // with sqrt(l) coupling ratios. The f level sits 0.5 GHz below |g,2> and
  // pushes both doublet states up by several MHz.
  EXPECT_NEAR(dl.transition(1, -1, 2, -1), 6.42408354706406, 1e-8);
  EXPECT_NEAR(dl.transition(1, +1, 2, +1), 6.46752804498719, 1e-8);
}
