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

// Small nonlinear programs with known solutions.

#ifndef SPLINEHORIZON_TESTS_SOLVER_PROBLEMS_H_
#define SPLINEHORIZON_TESTS_SOLVER_PROBLEMS_H_

#include <cmath>
#include <limits>
#include <memory>

#include "splinehorizon/nlp.h"

namespace splinehorizon::testing_problems {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min (z - 3)^2  s.t. z >= 5.
inline FunctionProblem ProjectedBound() {
  return FunctionProblem(
      1, 0,
      [](const Eigen::VectorXd& z) { return (z[0] - 3.0) * (z[0] - 3.0); },
      [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, 2.0 * (z[0] - 3.0));
      },
      [](const Eigen::VectorXd&) { return Eigen::VectorXd(); },
      [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 1); },
      Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, kInf));
}

// min z0^2 + z1^2  s.t. z0 + z1 = 2.
inline FunctionProblem SymmetricEquality() {
  return FunctionProblem(
      2, 1, [](const Eigen::VectorXd& z) { return z.squaredNorm(); },
      [](const Eigen::VectorXd& z) -> Eigen::VectorXd { return 2.0 * z; },
      [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, z[0] + z[1] - 2.0);
      },
      [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Ones(1, 2); },
      Eigen::VectorXd::Constant(2, -kInf), Eigen::VectorXd::Constant(2, kInf));
}

inline FunctionProblem Rosenbrock() {
  return FunctionProblem(
      2, 0,
      [](const Eigen::VectorXd& z) {
        return 100.0 * std::pow(z[1] - z[0] * z[0], 2) + std::pow(1 - z[0], 2);
      },
      [](const Eigen::VectorXd& z) {
        return Eigen::Vector2d(
            -400.0 * z[0] * (z[1] - z[0] * z[0]) - 2.0 * (1 - z[0]),
            200.0 * (z[1] - z[0] * z[0]));
      },
      [](const Eigen::VectorXd&) { return Eigen::VectorXd(); },
      [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 2); },
      Eigen::VectorXd::Constant(2, -kInf), Eigen::VectorXd::Constant(2, kInf));
}

// Double integrator with one quintic segment: variables are the monomial
// coefficients a_0..a_5 of p(t) on [0, d]; minimize the integrated squared
// jerk subject to position, velocity and acceleration at both ends.
inline std::unique_ptr<FunctionProblem> MinimumJerk(double d, double p0,
                                                    double v0, double a0,
                                                    double p1, double v1,
                                                    double a1) {
  // jerk = b . (1, t, t^2) with b = (6 a3, 24 a4, 60 a5).
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(3, 6);
  map(0, 3) = 6.0;
  map(1, 4) = 24.0;
  map(2, 5) = 60.0;
  Eigen::Matrix3d gram;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) gram(k, l) = std::pow(d, k + l + 1) / (k + l + 1);
  }
  const Eigen::MatrixXd h = 2.0 * map.transpose() * gram * map;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  for (int k = 0; k < 6; ++k) {
    a(3, k) = std::pow(d, k);
    if (k >= 1) a(4, k) = k * std::pow(d, k - 1);
    if (k >= 2) a(5, k) = k * (k - 1) * std::pow(d, k - 2);
  }
  Eigen::VectorXd b(6);
  b << p0, v0, a0, p1, v1, a1;
  return std::make_unique<FunctionProblem>(
      6, 6, [h](const Eigen::VectorXd& z) { return 0.5 * z.dot(h * z); },
      [h](const Eigen::VectorXd& z) -> Eigen::VectorXd { return h * z; },
      [a, b](const Eigen::VectorXd& z) -> Eigen::VectorXd { return a * z - b; },
      [a](const Eigen::VectorXd&) { return a; },
      Eigen::VectorXd::Constant(6, -kInf), Eigen::VectorXd::Constant(6, kInf));
}

}  // namespace splinehorizon::testing_problems

#endif  // SPLINEHORIZON_TESTS_SOLVER_PROBLEMS_H_
