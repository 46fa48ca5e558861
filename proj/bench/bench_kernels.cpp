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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cqed/device.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/kernels.hpp"

namespace {

using namespace cqed;

Liouvillian model(int n_cavity) {
  DeviceParams p;
  const SpaceDims d(n_cavity, 3);
  return build_liouvillian(jc_hamiltonian(p, d, p.nu_r), collapse_operators(p, 0.5, d, false), "jc", p.nu_r);
}

DenseVec random_vector(Eigen::Index n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  DenseVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(z(rng), z(rng));
  return v;
}

template <bool Parallel>
void BM_Apply(benchmark::State& state) {
  const kernels::CsrMat a(model(static_cast<int>(state.range(0))).superop());
  const DenseVec x = random_vector(a.cols());
  DenseVec y(a.rows());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::apply_parallel(a, x, y);
    } else {
      kernels::apply_serial(a, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nonZeros());
}

template <bool Parallel>
void BM_ResolventSweep(benchmark::State& state) {
  const SectorBlock b = restrict_to_sector(model(static_cast<int>(state.range(0))), 1);
  const kernels::ShiftedSystem sys(SparseMat(-b.block));
  const DenseVec rhs = random_vector(b.block.rows());
  const DenseVec obs = random_vector(b.block.rows());
  std::vector<cplx> shifts;
  for (int k = 0; k < 32; ++k) shifts.emplace_back(0.0, -2e9 + 1.25e8 * k);
  for (auto _ : state) {
    const kernels::SweepResult r = Parallel ? kernels::resolvent_sweep_parallel(sys, rhs, obs, shifts)
                                            : kernels::resolvent_sweep_serial(sys, rhs, obs, shifts);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(shifts.size()));
}

}  // namespace

BENCHMARK(BM_Apply<false>)->Arg(12)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Apply<true>)->Arg(12)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ResolventSweep<false>)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResolventSweep<true>)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  kernels::configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
