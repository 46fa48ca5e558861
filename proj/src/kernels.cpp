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
#include "cqed/kernels.hpp"

#include <cstdlib>
#include <limits>
#include <string>

#include <Eigen/SparseLU>
#include <omp.h>

namespace cqed::kernels {

namespace {

constexpr Eigen::Index kParallelRowThreshold = 2048;

// Returns false when the factorization fails.
bool solve_point(Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>>& lu, SparseMat& work,
                 const ShiftedSystem& sys, const DenseVec& rhs, const DenseVec& observable, cplx shift,
                 cplx& out) {
  cplx* vals = work.valuePtr();
  const cplx* base_vals = sys.base.valuePtr();
  std::copy(base_vals, base_vals + sys.base.nonZeros(), vals);
  for (Eigen::Index p : sys.diag_pos) vals[p] += shift;
  lu.factorize(work);
  if (lu.info() != Eigen::Success) {
    out = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    return false;
  }
  const DenseVec x = lu.solve(rhs);
  out = observable.cwiseProduct(x).sum();
  return true;
}

}  // namespace

void apply_serial(const CsrMat& a, const DenseVec& x, DenseVec& y) {
  y.resize(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    cplx acc = 0.0;
    for (CsrMat::InnerIterator it(a, r); it; ++it) acc += it.value() * x[it.col()];
    y[r] = acc;
  }
}

void apply_parallel(const CsrMat& a, const DenseVec& x, DenseVec& y) {
  y.resize(a.rows());
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static) if (rows >= kParallelRowThreshold)
  for (Eigen::Index r = 0; r < rows; ++r) {
    cplx acc = 0.0;
    for (CsrMat::InnerIterator it(a, r); it; ++it) acc += it.value() * x[it.col()];
    y[r] = acc;
  }
}

ShiftedSystem::ShiftedSystem(const SparseMat& m) {
  // Force explicit diagonal storage so every shift shares one pattern.
  SparseMat diag(m.rows(), m.cols());
  diag.setIdentity();
  base = m + diag;
  base.makeCompressed();
  for (Eigen::Index c = 0; c < base.outerSize(); ++c) {
    for (Eigen::Index p = base.outerIndexPtr()[c]; p < base.outerIndexPtr()[c + 1]; ++p) {
      if (base.innerIndexPtr()[p] == c) {
        base.valuePtr()[p] -= 1.0;
        diag_pos.push_back(p);
      }
    }
  }
}

SweepResult resolvent_sweep_serial(const ShiftedSystem& sys, const DenseVec& rhs, const DenseVec& observable,
                                   std::span<const cplx> shifts) {
  SweepResult out;
  out.values.resize(shifts.size());
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(sys.base);
  SparseMat work = sys.base;
  for (size_t k = 0; k < shifts.size(); ++k) {
    if (!solve_point(lu, work, sys, rhs, observable, shifts[k], out.values[k])) {
      out.failed.push_back(static_cast<int>(k));
    }
  }
  return out;
}

SweepResult resolvent_sweep_parallel(const ShiftedSystem& sys, const DenseVec& rhs, const DenseVec& observable,
                                     std::span<const cplx> shifts) {
  SweepResult out;
  const auto n = static_cast<long>(shifts.size());
  out.values.resize(shifts.size());
  std::vector<char> ok(shifts.size(), 1);
#pragma omp parallel
  {
    // Symbolic analysis is per worker; numeric factorization per point.
    Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(sys.base);
    SparseMat work = sys.base;
#pragma omp for schedule(dynamic, 4)
    for (long k = 0; k < n; ++k) {
      ok[k] = solve_point(lu, work, sys, rhs, observable, shifts[k], out.values[k]) ? 1 : 0;
    }
  }
  for (long k = 0; k < n; ++k)
    if (!ok[k]) out.failed.push_back(static_cast<int>(k));
  return out;
}

int configure_threads_from_env() {
  if (const char* env = std::getenv("CQED_NUM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
      // ignored: fall back to the OpenMP default
    }
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace cqed::kernels
