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

#ifndef SPLINEHORIZON_QP_SOLVER_H_
#define SPLINEHORIZON_QP_SOLVER_H_

#include <vector>

#include <Eigen/Dense>

namespace splinehorizon {

// Dense strictly convex quadratic program
//
//   min  0.5 x' H x + g' x
//   s.t. A_eq x  = b_eq
//        A_in x >= b_in
//
// H must be symmetric positive definite.
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd in_matrix;
  Eigen::VectorXd in_rhs;
};

enum class QpStatus { kOptimal, kInfeasible, kNotConvex, kIterationLimit };

// Multipliers satisfy H x + g = A_eq' eq_multipliers + A_in' in_multipliers
// with in_multipliers >= 0.
struct QpSolution {
  QpStatus status = QpStatus::kInfeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd in_multipliers;
  std::vector<int> active_inequalities;
  double objective = 0.0;
  int iterations = 0;
};

// Goldfarb-Idnani dual active-set method.
QpSolution SolveQp(const QuadraticProgram& qp, int max_iterations = 10000);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_QP_SOLVER_H_
