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

// Randomized invariant suites for the spline algebra and the assembled
// trajectory problem.

#ifndef SPLINEHORIZON_VALIDATION_H_
#define SPLINEHORIZON_VALIDATION_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splinehorizon/bspline.h"
#include "splinehorizon/scenario.h"
#include "splinehorizon/trajectory_problem.h"

namespace splinehorizon {

struct CheckResult {
  std::string name;
  // Worst observed error and the bound it is held to.
  double worst = 0.0;
  double tolerance = 0.0;
  int cases = 0;

  bool passed() const { return worst <= tolerance; }
};

// Random clamped layout of order 2..8 with up to five interior breakpoints
// at least 0.05 apart, ending in [0.5, 1]. min_continuity raises every
// continuity to at least that value.
KnotLayout RandomLayout(std::mt19937& rng, int min_continuity = 0);

// Partition of unity, non-negativity, agreement with the recursive basis
// definition, hull containment, linear precision, knot insertion, tail
// extraction, derivative against central differences, Greville collocation,
// sum and product combination. `layouts` random layouts per check.
std::vector<CheckResult> RunSplineSuite(std::uint32_t seed, int layouts = 100);

// Worst violation of the continuous-time constraints at `samples` uniform
// points of [0, end]: ellipses with true obstacle motion, heading cone,
// velocity limit and acceleration boxes, physical units.
double SampledViolation(const TrajectoryProblem& problem,
                        const Eigen::VectorXd& z, int samples);

// max |analytic - fd| / max(1, |fd|) over the objective gradient and every
// Jacobian entry. The reference is the Richardson combination of central
// differences with steps h and h/2; frozen columns are skipped.
double JacobianError(const TrajectoryProblem& problem,
                     const Eigen::VectorXd& z, double h);

// Solution of the initial problem for objective weights drawn log-uniformly
// within a factor 5 of the scenario's. Feasible for the unmodified problem.
Eigen::VectorXd RandomFeasiblePoint(const Scenario& scenario,
                                    std::mt19937& rng);

// Jacobian against central differences at `points` random feasible points,
// continuous-time feasibility of the converged initial solution, defining
// rows of completed random stacks, sparsity pattern invariance.
std::vector<CheckResult> RunModelSuite(const Scenario& scenario,
                                       std::uint32_t seed, int points = 10);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_VALIDATION_H_
