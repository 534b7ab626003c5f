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

#include "splinehorizon/sqp_solver.h"

#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "solver_problems.h"

namespace splinehorizon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(SqpSolverTest, ProjectedBound) {
  const FunctionProblem p = testing_problems::ProjectedBound();
  const SolverResult r = Solve(p, Eigen::VectorXd::Constant(1, 6.0));
  ASSERT_EQ(r.status, SolverStatus::kConverged) << r.message;
  EXPECT_NEAR(r.z[0], 5.0, 1e-6);
  EXPECT_NEAR(r.bound_multipliers[0], 4.0, 1e-6);
}

TEST(SqpSolverTest, SymmetricEquality) {
  const FunctionProblem p = testing_problems::SymmetricEquality();
  const SolverResult r = Solve(p, Eigen::Vector2d(3.0, -4.0));
  ASSERT_EQ(r.status, SolverStatus::kConverged) << r.message;
  EXPECT_NEAR(r.z[0], 1.0, 1e-6);
  EXPECT_NEAR(r.z[1], 1.0, 1e-6);
}

TEST(SqpSolverTest, MinimumJerkQuintic) {
  const double d = 2.0;
  const auto p = testing_problems::MinimumJerk(d, 0.0, 1.0, 0.5, 4.0, 2.0, 0.0);
  const SolverResult r = Solve(*p, Eigen::VectorXd::Zero(6));
  ASSERT_EQ(r.status, SolverStatus::kConverged) << r.message;
  const Eigen::VectorXd ref =
      oracle::MinimumJerkQuintic(0.0, 1.0, 0.5, 4.0, 2.0, 0.0, d);
  EXPECT_LE((r.z - ref).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SqpSolverTest, NonlinearEqualityWithBounds) {
  // min x0 + x1 on the unit circle with x1 >= -0.5.
  FunctionProblem p(
      2, 1, [](const Eigen::VectorXd& z) { return z[0] + z[1]; },
      [](const Eigen::VectorXd&) { return Eigen::Vector2d(1.0, 1.0); },
      [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, z.squaredNorm() - 1.0);
      },
      [](const Eigen::VectorXd& z) {
        Eigen::MatrixXd j(1, 2);
        j << 2 * z[0], 2 * z[1];
        return j;
      },
      Eigen::Vector2d(-kInf, -0.5), Eigen::Vector2d(kInf, kInf));
  const SolverResult r = Solve(p, Eigen::Vector2d(-0.3, -0.9));
  ASSERT_EQ(r.status, SolverStatus::kConverged) << r.message;
  EXPECT_NEAR(r.z[0], -std::sqrt(0.75), 1e-6);
  EXPECT_NEAR(r.z[1], -0.5, 1e-6);
  const KktResiduals k = CheckKkt(p, r);
  EXPECT_LE(k.stationarity, 1e-6);
  EXPECT_LE(k.feasibility, 1e-6);
  EXPECT_LE(k.complementarity, 1e-6);
}

TEST(SqpSolverTest, MeritNonIncreasingAndDeterministic) {
  FunctionProblem p = testing_problems::Rosenbrock();
  std::vector<IterationRecord> first;
  SolverConfig config;
  config.observer = [&](const IterationRecord& r) { first.push_back(r); };
  const SolverResult a = Solve(p, Eigen::Vector2d(-1.2, 1.0), config);
  ASSERT_EQ(a.status, SolverStatus::kConverged) << a.message;
  for (const IterationRecord& r : first) {
    EXPECT_LE(r.merit_after, r.merit_before);
  }
  std::vector<IterationRecord> second;
  config.observer = [&](const IterationRecord& r) { second.push_back(r); };
  const SolverResult b = Solve(p, Eigen::Vector2d(-1.2, 1.0), config);
  ASSERT_EQ(first.size(), second.size());
  for (size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].objective, second[i].objective);
  }
  EXPECT_EQ(a.z, b.z);
}

TEST(SqpSolverTest, WarmStartFromSolution) {
  const FunctionProblem p = testing_problems::SymmetricEquality();
  const SolverResult r = Solve(p, Eigen::Vector2d(3.0, -4.0));
  const SolverResult w = WarmSolve(p, r);
  ASSERT_EQ(w.status, SolverStatus::kConverged);
  EXPECT_LE(w.iterations, 2);
}

TEST(SqpSolverTest, WarmStartDimensionMismatch) {
  const FunctionProblem p = testing_problems::SymmetricEquality();
  SolverResult r;
  r.z = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(WarmSolve(p, r), std::invalid_argument);
}

TEST(SqpSolverTest, ReportsInfeasibleProblem) {
  // z0 = 1 and z0 = 2 written as z0 - 1 = 0 and z0^2 - 4 = 0.
  FunctionProblem p(
      1, 2, [](const Eigen::VectorXd& z) { return z[0] * z[0]; },
      [](const Eigen::VectorXd& z) {
        return Eigen::VectorXd::Constant(1, 2 * z[0]);
      },
      [](const Eigen::VectorXd& z) {
        return Eigen::Vector2d(z[0] - 1.0, z[0] * z[0] - 4.0);
      },
      [](const Eigen::VectorXd& z) {
        Eigen::MatrixXd j(2, 1);
        j << 1.0, 2 * z[0];
        return j;
      },
      Eigen::VectorXd::Constant(1, -kInf), Eigen::VectorXd::Constant(1, kInf));
  SolverConfig config;
  config.max_iterations = 200;
  const SolverResult r = Solve(p, Eigen::VectorXd::Constant(1, 0.0), config);
  EXPECT_NE(r.status, SolverStatus::kConverged);
}

TEST(SqpSolverTest, PropagatesEvaluationError) {
  FunctionProblem p(
      1, 0,
      [](const Eigen::VectorXd&) -> double {
        throw EvaluationError("not evaluable");
      },
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); },
      [](const Eigen::VectorXd&) { return Eigen::VectorXd(); },
      [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 1); },
      Eigen::VectorXd::Constant(1, -kInf), Eigen::VectorXd::Constant(1, kInf));
  EXPECT_EQ(Solve(p, Eigen::VectorXd::Zero(1)).status,
            SolverStatus::kEvaluationError);
}

TEST(SqpSolverTest, IterationLogLines) {
  const FunctionProblem p = testing_problems::SymmetricEquality();
  std::ostringstream log;
  SolverConfig config;
  config.log = &log;
  Solve(p, Eigen::Vector2d(3.0, -4.0), config);
  std::istringstream in(log.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    int it;
    double obj, viol, step;
    EXPECT_TRUE(static_cast<bool>(fields >> it >> obj >> viol >> step));
    ++lines;
  }
  EXPECT_GE(lines, 1);
}

}  // namespace
}  // namespace splinehorizon
