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

// Shrinking-horizon planning loop: initial guess, warm start by tail
// extraction, breakpoint freezing and removal, closed-loop simulation.

#ifndef SPLINEHORIZON_HORIZON_PLANNER_H_
#define SPLINEHORIZON_HORIZON_PLANNER_H_

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splinehorizon/bspline.h"
#include "splinehorizon/scenario.h"
#include "splinehorizon/sqp_solver.h"
#include "splinehorizon/trajectory_problem.h"

namespace splinehorizon {

enum class PlannerMode {
  kOptimizing,
  // Every interval is frozen; the stored trajectory is followed.
  kFollow,
  // The stored trajectory is exhausted; the ego keeps its terminal velocity.
  kCoast,
};

std::string ToString(PlannerMode mode);

// Residual tolerance for the terminal manifold test at tau = 0.
inline constexpr double kManifoldTolerance = 1e-6;
// Bound multipliers above this magnitude mark an active inequality.
inline constexpr double kActiveMultiplier = 1e-6;

struct PlannerState {
  Scenario scenario;
  BreakpointPlan plan;
  // Decision vector of Problem(). Unused in coast mode.
  Eigen::VectorXd z;
  EgoState ego;
  std::vector<Obstacle> obstacles;
  double time = 0.0;
  PlannerMode mode = PlannerMode::kOptimizing;
  bool lon_reached = false;
  bool lat_reached = false;
  // Last accepted solver result, reused for warm starts.
  SolverResult last;
  bool has_last = false;

  TrajectoryProblem Problem() const;
};

// Quintic initial guess with equidistant breakpoints. Obstacles are ignored.
// Throws ScenarioError when the guess times do not fit the horizon or the
// breakpoints end up closer than min_interval.
PlannerState InitialGuess(const Scenario& scenario);

// Position, velocity, acceleration and jerk per axis in physical units over
// the remaining domain, starting at `time`.
struct PlanSnapshot {
  double time = 0.0;
  double horizon = 0.0;
  BreakpointPlan plan;
  // [axis * 4 + derivative], normalized units.
  std::vector<Spline> ego;

  double end() const { return plan.end(); }
  // derivative 0..3 at physical time t (clamped to the snapshot domain).
  double Evaluate(Axis axis, int derivative, double t) const;
};

PlanSnapshot Snapshot(const PlannerState& state);

// Shifts the stored solution by one time step. Throws std::logic_error in
// coast mode with no trajectory left to advance on.
PlannerState Advance(const PlannerState& state);

using SolveFunction = std::function<SolverResult(
    const NlpProblem& problem, const SolverResult& warm,
    const SolverConfig& config)>;

// Warm-started SQP; a cold solve when warm has no multipliers.
SolverResult DefaultSolve(const NlpProblem& problem, const SolverResult& warm,
                          const SolverConfig& config);

struct StepOutcome {
  std::string status;
  bool solved = false;    // the solver ran
  bool accepted = false;  // its result replaced the stored solution
  bool active = false;
  double objective = 0.0;
  double warm_objective = 0.0;
  double warm_violation = 0.0;
  int iterations = 0;
  double solve_seconds = 0.0;
};

struct PlannerOptions {
  SolveFunction solve = DefaultSolve;
  std::ostream* solver_log = nullptr;
};

// One planning step on `state` in place. In optimizing mode the problem is
// solved from the stored solution; the result is kept only when it converged
// without raising the objective. Otherwise the stored solution stays.
StepOutcome PlanStep(PlannerState& state, const PlannerOptions& options = {});

struct StepRecord {
  int step = 0;
  double time = 0.0;
  EgoState state;
  PlannerMode mode = PlannerMode::kOptimizing;
  StepOutcome outcome;
  std::vector<double> breakpoints;
  std::vector<Axis> tags;
  std::vector<bool> frozen;
  bool lon_reached = false;
  bool lat_reached = false;
};

struct SimulationLog {
  std::vector<StepRecord> steps;
  // Plan after each step's solve; empty once coasting.
  std::vector<PlanSnapshot> plans;
  // Obstacle states per step.
  std::vector<std::vector<Obstacle>> obstacles;
};

struct RunOptions {
  // Number of advances. Negative: until coasting, at most horizon / time_step.
  int steps = -1;
  PlannerOptions planner;
};

SimulationLog RunClosedLoop(const Scenario& scenario,
                            const RunOptions& options = {});

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_HORIZON_PLANNER_H_
