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

#ifndef SPLINEHORIZON_SQP_SOLVER_H_
#define SPLINEHORIZON_SQP_SOLVER_H_

#include <functional>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "splinehorizon/nlp.h"

namespace splinehorizon {

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double violation = 0.0;
  double stationarity = 0.0;
  double step_size = 0.0;
  double penalty = 0.0;
  // l1 merit before and after the accepted step, both at `penalty`.
  double merit_before = 0.0;
  double merit_after = 0.0;
  bool elastic = false;
  // The accepted point was pulled back onto the defining rows.
  bool projected = false;
};

struct SolverConfig {
  double kkt_tolerance = 1e-6;
  double feasibility_tolerance = 1e-6;
  int max_iterations = 500;
  double initial_penalty = 1.0;
  // Penalty is raised to penalty_factor * max|multiplier| when it falls below
  // that bound.
  double penalty_factor = 2.0;
  double armijo = 1e-4;
  double hessian_floor = 1e-8;
  // Consecutive iterations with merit decrease below 1e-12 before giving up.
  int stall_limit = 20;
  // Text log: "iter objective violation step".
  std::ostream* log = nullptr;
  std::function<void(const IterationRecord&)> observer;
};

enum class SolverStatus {
  kConverged,
  kMaxIterations,
  kInfeasibleDetected,
  kEvaluationError,
};

std::string ToString(SolverStatus status);

struct SolverResult {
  SolverStatus status = SolverStatus::kEvaluationError;
  Eigen::VectorXd z;
  double objective = 0.0;
  double max_equality_violation = 0.0;
  double max_bound_violation = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  double wall_time_seconds = 0.0;
  // grad J - jac' * equality_multipliers - bound_multipliers = 0 at a KKT
  // point. bound_multipliers are >= 0 on active lower bounds and <= 0 on
  // active upper bounds.
  Eigen::VectorXd equality_multipliers;
  Eigen::VectorXd bound_multipliers;
  // Quasi-Newton approximation of the reduced Lagrangian Hessian.
  Eigen::MatrixXd reduced_hessian;
  std::string message;
};

// Line-search SQP: damped BFGS on the reduced Lagrangian Hessian, seeded by
// finite differences; equality and bound QP subproblems; l1 merit with
// penalty update. Variables in problem.partition() are eliminated through
// their defining rows with a sparse LU factorization, and trial points are
// projected back onto those rows.
SolverResult Solve(const NlpProblem& problem, const Eigen::VectorXd& z0,
                   const SolverConfig& config = {});

// Starts from previous.z and reuses its multipliers and Hessian when the
// dimensions match. Throws std::invalid_argument when previous.z does not
// match the problem dimension.
SolverResult WarmSolve(const NlpProblem& problem, const SolverResult& previous,
                       const SolverConfig& config = {});

// Residuals of the first-order conditions at result.z using the returned
// multipliers, recomputed from scratch.
struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double dual_sign = 0.0;
};
KktResiduals CheckKkt(const NlpProblem& problem, const SolverResult& result);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_SQP_SOLVER_H_
