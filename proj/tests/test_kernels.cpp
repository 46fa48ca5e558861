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

#include <cstdlib>
#include <random>

#include <Eigen/SparseLU>
#include <gtest/gtest.h>

#include "cqed/device.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/kernels.hpp"

using namespace cqed;

namespace {

SparseMat paper_liouvillian(int nc, int nt, double n_th) {
  const DeviceParams p;
  const SpaceDims d(nc, nt);
  const auto ch = collapse_operators(p, n_th, d, false);
  return build_liouvillian(jc_hamiltonian(p, d, p.nu_r), ch).superop();
}

DenseVec random_vec(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> z;
  DenseVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(z(rng), z(rng));
  return v;
}

}  // namespace

TEST(Kernels, ParallelMatvecMatchesSerialBitwise) {
  const kernels::CsrMat a(paper_liouvillian(12, 3, 0.5));
  const DenseVec x = random_vec(a.cols(), 1);
  DenseVec ys, yp;
  kernels::apply_serial(a, x, ys);
  kernels::apply_parallel(a, x, yp);
  ASSERT_EQ(ys.size(), yp.size());
  EXPECT_EQ((ys - yp).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Kernels, MatvecMatchesEigenProduct) {
  const SparseMat m = paper_liouvillian(4, 2, 0.3);
  const kernels::CsrMat a(m);
  const DenseVec x = random_vec(a.cols(), 2);
  DenseVec y;
  kernels::apply_serial(a, x, y);
  EXPECT_LT((y - m * x).cwiseAbs().maxCoeff(), 1e-9 * (m * x).cwiseAbs().maxCoeff());
}

TEST(Kernels, ShiftedSystemHasFullDiagonal) {
  SparseMat m(3, 3);
  m.insert(0, 1) = 1.0;
  m.insert(2, 0) = 2.0;
  m.makeCompressed();
  const kernels::ShiftedSystem sys(m);
  ASSERT_EQ(sys.diag_pos.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(sys.base.valuePtr()[sys.diag_pos[k]], cplx(0.0));
}

TEST(Kernels, ResolventSweepSerialParallelAgreeWithDirectSolves) {
  const SparseMat m = paper_liouvillian(5, 2, 0.2);
  const kernels::ShiftedSystem sys(m);
  const DenseVec rhs = random_vec(m.rows(), 3);
  const DenseVec obs = random_vec(m.rows(), 4);
  std::vector<cplx> shifts;
  for (int k = 0; k < 9; ++k) shifts.emplace_back(0.0, -2.0 * M_PI * (0.1 - 0.025 * k) * 1e9);
  const auto s = kernels::resolvent_sweep_serial(sys, rhs, obs, shifts);
  const auto p = kernels::resolvent_sweep_parallel(sys, rhs, obs, shifts);
  EXPECT_TRUE(s.failed.empty());
  EXPECT_TRUE(p.failed.empty());
  for (size_t k = 0; k < shifts.size(); ++k) {
    SparseMat a = m;
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += shifts[k];
    Eigen::SparseLU<SparseMat> lu(a);
    const cplx direct = obs.cwiseProduct(DenseVec(lu.solve(rhs))).sum();
    EXPECT_LT(std::abs(s.values[k] - direct), 1e-10 * std::abs(direct));
    EXPECT_EQ(s.values[k], p.values[k]);
  }
}

TEST(Kernels, ThreadCountFromEnvironment) {
  ::setenv("CQED_NUM_THREADS", "1", 1);
  EXPECT_EQ(kernels::configure_threads_from_env(), 1);
  EXPECT_EQ(kernels::max_threads(), 1);
  ::unsetenv("CQED_NUM_THREADS");
}
