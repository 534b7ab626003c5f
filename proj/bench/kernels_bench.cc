// Copyright 2026 The splinehorizon Authors
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

// Serial against OpenMP for the data-parallel kernels, plus end-to-end solves.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "splinehorizon/horizon_planner.h"
#include "splinehorizon/kernels.h"
#include "splinehorizon/scenario.h"
#include "splinehorizon/sqp_solver.h"

namespace splinehorizon {
namespace {

using kernels::Backend;

Spline TestSpline() {
  const KnotLayout layout({0.0, 0.3, 0.55, 0.9}, {2, 3}, 6);
  Eigen::VectorXd c(layout.dimension());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = std::sin(1.7 * i);
  return Spline(layout, c);
}

void BM_EvaluateSamples(benchmark::State& state, Backend backend) {
  const Spline s = TestSpline();
  const std::vector<double> taus =
      kernels::UniformSamples(0.0, 0.9, static_cast<int>(state.range(0)));
  std::vector<double> out(taus.size());
  for (auto _ : state) {
    kernels::EvaluateSamples(s, taus, out, backend);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * taus.size());
}
BENCHMARK_CAPTURE(BM_EvaluateSamples, serial, Backend::kSerial)
    ->Arg(1000)->Arg(10000)->Arg(100000);
BENCHMARK_CAPTURE(BM_EvaluateSamples, openmp, Backend::kOpenMP)
    ->Arg(1000)->Arg(10000)->Arg(100000);

void BM_DifferenceColumns(benchmark::State& state, Backend backend) {
  const PlannerState guess = InitialGuess(HighwayLaneChange(2));
  const TrajectoryProblem problem = guess.Problem();
  const kernels::VectorFunction f = [&problem](const Eigen::VectorXd& x) {
    return problem.Evaluate(x, false).residuals;
  };
  std::vector<int> columns;
  for (int g = 0; g < problem.num_intervals(); ++g) {
    columns.push_back(problem.interval_variable(g));
  }
  const std::vector<double> steps(columns.size(), 1e-4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::ExtrapolatedDifferenceColumns(
        f, guess.z, columns, steps, backend));
  }
}
BENCHMARK_CAPTURE(BM_DifferenceColumns, serial, Backend::kSerial);
BENCHMARK_CAPTURE(BM_DifferenceColumns, openmp, Backend::kOpenMP);

void BM_InitialSolve(benchmark::State& state) {
  Scenario s = HighwayLaneChange(static_cast<int>(state.range(0)));
  s.nu_y = static_cast<int>(state.range(1));
  const PlannerState guess = InitialGuess(s);
  const TrajectoryProblem problem = guess.Problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Solve(problem, guess.z));
  }
}
BENCHMARK(BM_InitialSolve)
    ->ArgsProduct({{2, 4, 5}, {0, 1, 2}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace splinehorizon

BENCHMARK_MAIN();
