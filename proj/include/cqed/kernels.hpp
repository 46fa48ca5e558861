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

// Data-parallel inner loops. Each kernel has a serial reference
// implementation that the tests compare against and the benchmark times.

#include <span>
#include <vector>

#include "cqed/qspace.hpp"

namespace cqed::kernels {

using CsrMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// y = A x.
void apply_serial(const CsrMat& a, const DenseVec& x, DenseVec& y);
void apply_parallel(const CsrMat& a, const DenseVec& x, DenseVec& y);

/// Family of systems (shift_k I + base) x_k = rhs, reduced to the scalar
/// observable . x_k. The sparsity pattern of base must contain the full
/// diagonal so one symbolic factorization serves every shift.
struct ShiftedSystem {
  SparseMat base;
  std::vector<Eigen::Index> diag_pos;  // offsets of diagonal entries in base.valuePtr()

  explicit ShiftedSystem(const SparseMat& m);
};

struct SweepResult {
  std::vector<cplx> values;
  std::vector<int> failed;  // indices whose factorization failed; values are NaN there
};

SweepResult resolvent_sweep_serial(const ShiftedSystem& sys, const DenseVec& rhs, const DenseVec& observable,
                                   std::span<const cplx> shifts);
SweepResult resolvent_sweep_parallel(const ShiftedSystem& sys, const DenseVec& rhs, const DenseVec& observable,
                                     std::span<const cplx> shifts);

/// Thread count from CQED_NUM_THREADS, applied to the OpenMP runtime.
/// Returns the value in effect.
int configure_threads_from_env();
int max_threads();

}  // namespace cqed::kernels
