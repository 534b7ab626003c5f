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

#include "splinehorizon/qp_solver.h"

#include <limits>
#include <random>

#include <gtest/gtest.h>

namespace splinehorizon {
namespace {

// Brute force: enumerate every subset of inequalities treated as equalities,
// solve the KKT system, keep the best primal-dual feasible candidate.
Eigen::VectorXd EnumerateActiveSets(const QuadraticProgram& qp) {
  const int n = static_cast<int>(qp.gradient.size());
  const int me = static_cast<int>(qp.eq_rhs.size());
  const int mi = static_cast<int>(qp.in_rhs.size());
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (int mask = 0; mask < (1 << mi); ++mask) {
    std::vector<int> act;
    for (int k = 0; k < mi; ++k) {
      if (mask & (1 << k)) act.push_back(k);
    }
    const int m = me + static_cast<int>(act.size());
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    a.topRows(me) = qp.eq_matrix;
    b.head(me) = qp.eq_rhs;
    for (size_t k = 0; k < act.size(); ++k) {
      a.row(me + k) = qp.in_matrix.row(act[k]);
      b[me + k] = qp.in_rhs[act[k]];
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = qp.hessian;
    kkt.topRightCorner(n, m) = -a.transpose();
    kkt.bottomLeftCorner(m, n) = a;
    Eigen::VectorXd rhs(n + m);
    rhs << -qp.gradient, b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (lu.rank() < n + m) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    if (mi > 0 && (qp.in_matrix * x - qp.in_rhs).minCoeff() < -1e-9) continue;
    if (m > me && sol.tail(m - me).minCoeff() < -1e-9) continue;
    const double f = 0.5 * x.dot(qp.hessian * x) + qp.gradient.dot(x);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

TEST(QpSolverTest, Unconstrained) {
  QuadraticProgram qp;
  qp.hessian = Eigen::Matrix2d{{2.0, 0.0}, {0.0, 4.0}};
  qp.gradient = Eigen::Vector2d(-2.0, -4.0);
  qp.eq_matrix.resize(0, 2);
  qp.in_matrix.resize(0, 2);
  const QpSolution s = SolveQp(qp);
  ASSERT_EQ(s.status, QpStatus::kOptimal);
  EXPECT_NEAR(s.x[0], 1.0, 1e-12);
  EXPECT_NEAR(s.x[1], 1.0, 1e-12);
}

TEST(QpSolverTest, DetectsInfeasibility) {
  QuadraticProgram qp;
  qp.hessian = Eigen::MatrixXd::Identity(1, 1);
  qp.gradient = Eigen::VectorXd::Zero(1);
  qp.eq_matrix.resize(0, 1);
  qp.in_matrix = Eigen::Vector2d(1.0, -1.0);
  qp.in_rhs = Eigen::Vector2d(1.0, 0.0);  // x >= 1 and x <= 0
  EXPECT_EQ(SolveQp(qp).status, QpStatus::kInfeasible);
}

TEST(QpSolverTest, RejectsIndefiniteHessian) {
  QuadraticProgram qp;
  qp.hessian = Eigen::MatrixXd::Identity(2, 2);
  qp.hessian(1, 1) = -1.0;
  qp.gradient = Eigen::VectorXd::Zero(2);
  qp.eq_matrix.resize(0, 2);
  qp.in_matrix.resize(0, 2);
  EXPECT_EQ(SolveQp(qp).status, QpStatus::kNotConvex);
}

TEST(QpSolverTest, MatchesActiveSetEnumeration) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    const int me = trial % 2;
    const int mi = 1 + trial % 6;
    Eigen::MatrixXd r(n, n);
    for (auto& v : r.reshaped()) v = g(rng);
    QuadraticProgram qp;
    qp.hessian = r.transpose() * r + 0.1 * Eigen::MatrixXd::Identity(n, n);
    qp.gradient.resize(n);
    for (auto& v : qp.gradient) v = g(rng);
    qp.eq_matrix.resize(me, n);
    for (auto& v : qp.eq_matrix.reshaped()) v = g(rng);
    qp.eq_rhs.resize(me);
    for (auto& v : qp.eq_rhs) v = g(rng);
    // Inequalities satisfied by a known point keep the problem feasible.
    Eigen::VectorXd x0(n);
    for (auto& v : x0) v = g(rng);
    if (me > 0) {
      x0 = qp.eq_matrix.completeOrthogonalDecomposition().solve(qp.eq_rhs);
    }
    qp.in_matrix.resize(mi, n);
    for (auto& v : qp.in_matrix.reshaped()) v = g(rng);
    qp.in_rhs = qp.in_matrix * x0 - Eigen::VectorXd::Constant(mi, 0.5);
    const QpSolution s = SolveQp(qp);
    ASSERT_EQ(s.status, QpStatus::kOptimal) << "trial " << trial;
    const Eigen::VectorXd ref = EnumerateActiveSets(qp);
    ASSERT_EQ(ref.size(), n);
    EXPECT_LE((s.x - ref).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    // Stationarity with the returned multipliers.
    Eigen::VectorXd stat = qp.hessian * s.x + qp.gradient -
                           qp.eq_matrix.transpose() * s.eq_multipliers -
                           qp.in_matrix.transpose() * s.in_multipliers;
    EXPECT_LE(stat.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(s.in_multipliers.minCoeff(), 0.0);
  }
}

}  // namespace
}  // namespace splinehorizon
