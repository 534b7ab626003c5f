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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "splinehorizon/qp_solver.h"

namespace splinehorizon {

FunctionProblem::FunctionProblem(int num_variables, int num_constraints,
                                 Objective objective, Gradient gradient,
                                 Residuals residuals, Jacobian jacobian,
                                 Eigen::VectorXd lower, Eigen::VectorXd upper)
    : n_(num_variables),
      m_(num_constraints),
      objective_(std::move(objective)),
      gradient_(std::move(gradient)),
      residuals_(std::move(residuals)),
      jacobian_(std::move(jacobian)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {}

NlpEvaluation FunctionProblem::Evaluate(const Eigen::VectorXd& z,
                                        bool derivatives) const {
  NlpEvaluation e;
  e.objective = objective_(z);
  e.residuals = m_ > 0 ? residuals_(z) : Eigen::VectorXd();
  if (derivatives) {
    e.gradient = gradient_(z);
    if (m_ > 0) {
      e.jacobian = jacobian_(z).sparseView();
    } else {
      e.jacobian.resize(0, n_);
    }
  }
  return e;
}

double MaxBoundViolation(const NlpProblem& problem, const Eigen::VectorXd& z) {
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  double v = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    v = std::max({v, lo[i] - z[i], z[i] - hi[i]});
  }
  return v;
}

std::string ToString(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged:
      return "converged";
    case SolverStatus::kMaxIterations:
      return "max-iterations";
    case SolverStatus::kInfeasibleDetected:
      return "infeasible-detected";
    case SolverStatus::kEvaluationError:
      return "evaluation-error";
  }
  return "unknown";
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseLu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

enum class VarKind { kBasic, kFree, kFixed };

// Variable and row classification. Basic variables are eliminated through
// their defining rows; free variables span the reduced space.
struct Structure {
  int n = 0;
  int m = 0;
  std::vector<int> basic;
  std::vector<int> free;
  std::vector<int> defining;
  std::vector<int> general;
  std::vector<VarKind> kind;
  std::vector<int> slot;      // position within basic / free
  std::vector<int> row_slot;  // position within defining / general
  std::vector<char> row_defining;
};

Structure Classify(const NlpProblem& problem) {
  Structure s;
  s.n = problem.num_variables();
  s.m = problem.num_constraints();
  s.kind.assign(s.n, VarKind::kFree);
  s.slot.assign(s.n, -1);
  s.row_slot.assign(s.m, -1);
  s.row_defining.assign(s.m, 0);
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  if (const auto part = problem.partition()) {
    if (part->variables.size() != part->constraints.size()) {
      throw std::invalid_argument("dependent partition is not square");
    }
    for (size_t k = 0; k < part->variables.size(); ++k) {
      s.kind[part->variables[k]] = VarKind::kBasic;
      s.slot[part->variables[k]] = static_cast<int>(k);
      s.row_defining[part->constraints[k]] = 1;
      s.row_slot[part->constraints[k]] = static_cast<int>(k);
    }
    s.basic = part->variables;
    s.defining = part->constraints;
  }
  for (int j = 0; j < s.n; ++j) {
    if (s.kind[j] == VarKind::kBasic) continue;
    if (lo[j] == hi[j]) {
      s.kind[j] = VarKind::kFixed;
    } else {
      s.slot[j] = static_cast<int>(s.free.size());
      s.free.push_back(j);
    }
  }
  for (int i = 0; i < s.m; ++i) {
    if (!s.row_defining[i]) {
      s.row_slot[i] = static_cast<int>(s.general.size());
      s.general.push_back(i);
    }
  }
  return s;
}

// One reduced-space linearization of the problem.
struct Linearization {
  NlpEvaluation eval;
  std::unique_ptr<SparseLu> lu;
  Eigen::MatrixXd zb;    // d z_B / d z_N along the defining manifold
  Eigen::VectorXd yc;    // Newton correction of z_B for the defining rows
  Eigen::MatrixXd agb;   // general rows x basic
  Eigen::MatrixXd agn;   // general rows x free
  Eigen::MatrixXd e;     // reduced general Jacobian
  Eigen::VectorXd e_rhs;
  Eigen::VectorXd reduced_gradient;
};

Linearization Linearize(const Structure& s, NlpEvaluation eval) {
  Linearization lin;
  const int nb = static_cast<int>(s.basic.size());
  const int nf = static_cast<int>(s.free.size());
  const int mg = static_cast<int>(s.general.size());
  lin.agb = Eigen::MatrixXd::Zero(mg, nb);
  lin.agn = Eigen::MatrixXd::Zero(mg, nf);
  Eigen::MatrixXd adn = Eigen::MatrixXd::Zero(nb, nf);
  std::vector<Eigen::Triplet<double>> adb;
  const SparseMatrix& a = eval.jacobian;
  for (int col = 0; col < a.outerSize(); ++col) {
    const VarKind kind = s.kind[col];
    if (kind == VarKind::kFixed) continue;
    const int cs = s.slot[col];
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      const int rs = s.row_slot[row];
      if (s.row_defining[row]) {
        if (kind == VarKind::kBasic) {
          adb.emplace_back(rs, cs, it.value());
        } else {
          adn(rs, cs) += it.value();
        }
      } else if (kind == VarKind::kBasic) {
        lin.agb(rs, cs) += it.value();
      } else {
        lin.agn(rs, cs) += it.value();
      }
    }
  }
  Eigen::VectorXd cd(nb);
  for (int k = 0; k < nb; ++k) cd[k] = eval.residuals[s.defining[k]];
  Eigen::VectorXd cg(mg);
  for (int k = 0; k < mg; ++k) cg[k] = eval.residuals[s.general[k]];

  if (nb > 0) {
    SparseMatrix m(nb, nb);
    m.setFromTriplets(adb.begin(), adb.end());
    m.makeCompressed();
    lin.lu = std::make_unique<SparseLu>();
    lin.lu->compute(m);
    if (lin.lu->info() != Eigen::Success) {
      throw EvaluationError("defining Jacobian block is singular");
    }
    lin.zb = -lin.lu->solve(adn);
    lin.yc = -lin.lu->solve(cd);
  } else {
    lin.zb.resize(0, nf);
    lin.yc.resize(0);
  }
  Eigen::VectorXd gb(nb);
  for (int k = 0; k < nb; ++k) gb[k] = eval.gradient[s.basic[k]];
  Eigen::VectorXd gn(nf);
  for (int k = 0; k < nf; ++k) gn[k] = eval.gradient[s.free[k]];
  lin.reduced_gradient = gn + lin.zb.transpose() * gb;
  lin.e = lin.agn + lin.agb * lin.zb;
  lin.e_rhs = -cg - lin.agb * lin.yc;
  lin.eval = std::move(eval);
  return lin;
}

// A bound of one variable in the reduced QP: sign * (row . p) >= rhs.
struct BoundRow {
  int var;
  bool lower;
};

struct Subproblem {
  QuadraticProgram qp;
  std::vector<BoundRow> bounds;
};

Subproblem BuildSubproblem(const Structure& s, const NlpProblem& problem,
                           const Linearization& lin, const Eigen::VectorXd& z,
                           const Eigen::MatrixXd& hessian) {
  const int nf = static_cast<int>(s.free.size());
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  Subproblem sub;
  for (int j = 0; j < s.n; ++j) {
    if (s.kind[j] == VarKind::kFixed) continue;
    if (std::isfinite(lo[j])) sub.bounds.push_back({j, true});
    if (std::isfinite(hi[j])) sub.bounds.push_back({j, false});
  }
  const int mi = static_cast<int>(sub.bounds.size());
  sub.qp.hessian = hessian;
  sub.qp.gradient = lin.reduced_gradient;
  sub.qp.eq_matrix = lin.e;
  sub.qp.eq_rhs = lin.e_rhs;
  sub.qp.in_matrix = Eigen::MatrixXd::Zero(mi, nf);
  sub.qp.in_rhs.resize(mi);
  for (int k = 0; k < mi; ++k) {
    const BoundRow& b = sub.bounds[k];
    const double sign = b.lower ? 1.0 : -1.0;
    const double bound = b.lower ? lo[b.var] : hi[b.var];
    const int slot = s.slot[b.var];
    double shift = z[b.var];
    if (s.kind[b.var] == VarKind::kBasic) {
      sub.qp.in_matrix.row(k) = sign * lin.zb.row(slot);
      shift += lin.yc[slot];
    } else {
      sub.qp.in_matrix(k, slot) = sign;
    }
    sub.qp.in_rhs[k] = sign * (bound - shift);
  }
  return sub;
}

// Single-slack relaxation: every row may be violated by s >= 0 at cost
// weight * s. Always feasible.
QpSolution SolveElastic(const QuadraticProgram& qp, double weight) {
  const int n = static_cast<int>(qp.gradient.size());
  const int me = static_cast<int>(qp.eq_rhs.size());
  const int mi = static_cast<int>(qp.in_rhs.size());
  QuadraticProgram el;
  el.hessian = Eigen::MatrixXd::Zero(n + 1, n + 1);
  el.hessian.topLeftCorner(n, n) = qp.hessian;
  el.hessian(n, n) = 1e-8 * std::max(1.0, qp.hessian.diagonal().maxCoeff());
  el.gradient.resize(n + 1);
  el.gradient << qp.gradient, weight;
  el.eq_matrix.resize(0, n + 1);
  el.eq_rhs.resize(0);
  const int rows = 2 * me + mi + 1;
  el.in_matrix = Eigen::MatrixXd::Zero(rows, n + 1);
  el.in_rhs.resize(rows);
  int r = 0;
  for (int i = 0; i < me; ++i) {
    el.in_matrix.row(r).head(n) = qp.eq_matrix.row(i);
    el.in_matrix(r, n) = 1.0;
    el.in_rhs[r++] = qp.eq_rhs[i];
    el.in_matrix.row(r).head(n) = -qp.eq_matrix.row(i);
    el.in_matrix(r, n) = 1.0;
    el.in_rhs[r++] = -qp.eq_rhs[i];
  }
  for (int i = 0; i < mi; ++i) {
    el.in_matrix.row(r).head(n) = qp.in_matrix.row(i);
    el.in_matrix(r, n) = 1.0;
    el.in_rhs[r++] = qp.in_rhs[i];
  }
  el.in_matrix(r, n) = 1.0;
  el.in_rhs[r] = 0.0;

  QpSolution sol = SolveQp(el);
  QpSolution out;
  out.status = sol.status;
  if (sol.status != QpStatus::kOptimal) return out;
  out.x = sol.x.head(n);
  out.eq_multipliers.resize(me);
  for (int i = 0; i < me; ++i) {
    out.eq_multipliers[i] = sol.in_multipliers[2 * i] -
                            sol.in_multipliers[2 * i + 1];
  }
  out.in_multipliers = sol.in_multipliers.segment(2 * me, mi);
  out.objective = sol.objective;
  return out;
}

struct Multipliers {
  Eigen::VectorXd general;      // per general row
  Eigen::VectorXd bound_rows;   // per BoundRow, >= 0
};

// Reduced gradient of the Lagrangian at a linearization.
Eigen::VectorXd ReducedLagrangianGradient(const Structure& s,
                                          const Linearization& lin,
                                          const Subproblem& sub,
                                          const Multipliers& mult) {
  Eigen::VectorXd g = lin.reduced_gradient - lin.e.transpose() * mult.general;
  for (size_t k = 0; k < sub.bounds.size(); ++k) {
    const double nu = mult.bound_rows[static_cast<Eigen::Index>(k)];
    if (nu == 0.0) continue;
    const BoundRow& b = sub.bounds[k];
    const double sign = b.lower ? 1.0 : -1.0;
    const int slot = s.slot[b.var];
    if (s.kind[b.var] == VarKind::kBasic) {
      g -= sign * nu * lin.zb.row(slot).transpose();
    } else {
      g[slot] -= sign * nu;
    }
  }
  return g;
}

struct FullMultipliers {
  Eigen::VectorXd equality;
  Eigen::VectorXd bound;
};

FullMultipliers ExpandMultipliers(const Structure& s, const Linearization& lin,
                                  const Subproblem& sub,
                                  const Multipliers& mult) {
  FullMultipliers out;
  out.equality = Eigen::VectorXd::Zero(s.m);
  out.bound = Eigen::VectorXd::Zero(s.n);
  for (size_t k = 0; k < s.general.size(); ++k) {
    out.equality[s.general[k]] = mult.general[static_cast<Eigen::Index>(k)];
  }
  for (size_t k = 0; k < sub.bounds.size(); ++k) {
    const BoundRow& b = sub.bounds[k];
    out.bound[b.var] +=
        (b.lower ? 1.0 : -1.0) * mult.bound_rows[static_cast<Eigen::Index>(k)];
  }
  const int nb = static_cast<int>(s.basic.size());
  if (nb > 0) {
    Eigen::VectorXd rhs(nb);
    for (int k = 0; k < nb; ++k) {
      rhs[k] = lin.eval.gradient[s.basic[k]] - out.bound[s.basic[k]];
    }
    rhs -= lin.agb.transpose() * mult.general;
    const Eigen::VectorXd ld = lin.lu->transpose().solve(rhs);
    for (int k = 0; k < nb; ++k) out.equality[s.defining[k]] = ld[k];
  }
  // Fixed variables absorb whatever remains of the stationarity condition.
  const Eigen::VectorXd residual =
      lin.eval.gradient - lin.eval.jacobian.transpose() * out.equality;
  for (int j = 0; j < s.n; ++j) {
    if (s.kind[j] == VarKind::kFixed) out.bound[j] = residual[j];
  }
  return out;
}

double DualScale(const FullMultipliers& mult) {
  constexpr double kScaleMax = 100.0;
  const double count = static_cast<double>(mult.equality.size() +
                                           mult.bound.size());
  if (count == 0) return 1.0;
  const double norm = mult.equality.lpNorm<1>() + mult.bound.lpNorm<1>();
  return std::max(kScaleMax, norm / count) / kScaleMax;
}

double BoundViolationL1(const NlpProblem& problem, const Eigen::VectorXd& z) {
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  double v = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    v += std::max(0.0, lo[i] - z[i]) + std::max(0.0, z[i] - hi[i]);
  }
  return v;
}

double Complementarity(const NlpProblem& problem, const Eigen::VectorXd& z,
                       const Eigen::VectorXd& bound_multipliers,
                       const std::vector<VarKind>& kind) {
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (kind[i] == VarKind::kFixed) continue;
    const double nu = bound_multipliers[i];
    if (nu > 0.0) worst = std::max(worst, nu * std::abs(z[i] - lo[i]));
    if (nu < 0.0) worst = std::max(worst, -nu * std::abs(hi[i] - z[i]));
  }
  return worst;
}

// Reduced Lagrangian Hessian from forward differences of the reduced
// gradient along the linearized defining manifold, with absolute eigenvalues
// so the QP stays strictly convex.
Eigen::MatrixXd DifferenceHessian(const Structure& s, const NlpProblem& problem,
                                  const Linearization& lin,
                                  const Subproblem& sub,
                                  const Multipliers& mult,
                                  const Eigen::VectorXd& z, double floor) {
  const int nf = static_cast<int>(s.free.size());
  const Eigen::VectorXd base = ReducedLagrangianGradient(s, lin, sub, mult);
  Eigen::MatrixXd h(nf, nf);
  for (int k = 0; k < nf; ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(z[s.free[k]]));
    Eigen::VectorXd zk = z;
    zk[s.free[k]] += step;
    for (size_t b = 0; b < s.basic.size(); ++b) {
      zk[s.basic[b]] += step * lin.zb(static_cast<Eigen::Index>(b), k);
    }
    const Linearization other = Linearize(s, problem.Evaluate(zk, true));
    const Subproblem other_sub =
        BuildSubproblem(s, problem, other, zk, Eigen::MatrixXd());
    h.col(k) = (ReducedLagrangianGradient(s, other, other_sub, mult) - base) /
               step;
  }
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  Eigen::VectorXd values = eig.eigenvalues().cwiseAbs();
  const double largest = values.size() > 0 ? values.maxCoeff() : 0.0;
  const double lowest = std::max(floor, 1e-10 * largest);
  values = values.cwiseMax(lowest);
  return eig.eigenvectors() * values.asDiagonal() *
         eig.eigenvectors().transpose();
}

// Least-squares multipliers of the reduced equality rows.
Multipliers InitialMultipliers(const Linearization& lin,
                               const Subproblem& sub) {
  Multipliers m;
  m.bound_rows = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(
      sub.bounds.size()));
  if (lin.e.rows() == 0) {
    m.general.resize(0);
  } else {
    m.general = lin.e.transpose().completeOrthogonalDecomposition().solve(
        lin.reduced_gradient);
  }
  return m;
}

// Least-squares multipliers at z on the active set of the subproblem. False
// when an active multiplier has the wrong sign.
bool FirstOrderMultipliers(const Structure& s, const Linearization& lin,
                           const Subproblem& sub, const Multipliers& qp,
                           Multipliers& out) {
  std::vector<int> active;
  for (size_t k = 0; k < sub.bounds.size(); ++k) {
    if (qp.bound_rows[static_cast<Eigen::Index>(k)] > 0.0) {
      active.push_back(static_cast<int>(k));
    }
  }
  const Eigen::Index ng = lin.e.rows();
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd a(lin.reduced_gradient.size(), ng + na);
  if (ng > 0) a.leftCols(ng) = lin.e.transpose();
  for (Eigen::Index j = 0; j < na; ++j) {
    const BoundRow& b = sub.bounds[active[j]];
    const double sign = b.lower ? 1.0 : -1.0;
    const int slot = s.slot[b.var];
    if (s.kind[b.var] == VarKind::kBasic) {
      a.col(ng + j) = sign * lin.zb.row(slot).transpose();
    } else {
      a.col(ng + j).setZero();
      a(slot, ng + j) = sign;
    }
  }
  const Eigen::VectorXd y =
      a.cols() > 0 ? Eigen::VectorXd(a.completeOrthogonalDecomposition().solve(
                         lin.reduced_gradient))
                   : Eigen::VectorXd();
  out.general = y.head(ng);
  out.bound_rows =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sub.bounds.size()));
  for (Eigen::Index j = 0; j < na; ++j) {
    if (y[ng + j] < 0.0) return false;
    out.bound_rows[active[j]] = y[ng + j];
  }
  return true;
}

constexpr int kProjectionIterations = 8;
constexpr double kProjectionTolerance = 1e-14;
constexpr double kNoiseFeasibility = 1e-2;

class SqpRun {
 public:
  SqpRun(const NlpProblem& problem, const SolverConfig& config)
      : problem_(problem), config_(config), s_(Classify(problem)) {}

  SolverResult Run(Eigen::VectorXd z, const SolverResult* previous);

 private:
  double Merit(const NlpEvaluation& e, const Eigen::VectorXd& z) const {
    return e.objective +
           penalty_ * (e.residuals.lpNorm<1>() + BoundViolationL1(problem_, z));
  }

  void Log(const IterationRecord& r) const {
    if (config_.log) {
      *config_.log << r.iteration << ' ' << r.objective << ' ' << r.violation
                   << ' ' << r.step_size << '\n';
    }
    if (config_.observer) config_.observer(r);
  }

  const NlpProblem& problem_;
  const SolverConfig& config_;
  Structure s_;
  double penalty_ = 1.0;
};

SolverResult SqpRun::Run(Eigen::VectorXd z, const SolverResult* previous) {
  const auto start = std::chrono::steady_clock::now();
  const int nf = static_cast<int>(s_.free.size());
  const Eigen::VectorXd& lo = problem_.lower_bounds();
  const Eigen::VectorXd& hi = problem_.upper_bounds();

  SolverResult result;
  auto finish = [&](SolverStatus status, std::string message) {
    result.status = status;
    result.message = std::move(message);
    result.z = z;
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
  };

  for (int j = 0; j < s_.n; ++j) {
    if (s_.kind[j] != VarKind::kBasic) z[j] = std::clamp(z[j], lo[j], hi[j]);
  }

  penalty_ = config_.initial_penalty;
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Identity(nf, nf);
  bool hessian_initialized = false;
  if (previous != nullptr) {
    if (previous->reduced_hessian.rows() == nf &&
        previous->reduced_hessian.cols() == nf && nf > 0) {
      hessian = previous->reduced_hessian;
      hessian_initialized = true;
    }
    double largest = 0.0;
    if (previous->equality_multipliers.size() == s_.m) {
      largest = previous->equality_multipliers.cwiseAbs().maxCoeff();
    }
    if (previous->bound_multipliers.size() == s_.n && s_.n > 0) {
      largest = std::max(largest,
                         previous->bound_multipliers.cwiseAbs().maxCoeff());
    }
    if (std::isfinite(largest)) {
      penalty_ = std::max(penalty_, config_.penalty_factor * largest);
    }
  }

  Linearization lin;
  try {
    lin = Linearize(s_, problem_.Evaluate(z, true));
  } catch (const EvaluationError& e) {
    return finish(SolverStatus::kEvaluationError, e.what());
  }

  int stall = 0;
  Multipliers last_multipliers;
  for (int iter = 0; iter < config_.max_iterations; ++iter) {
    result.iterations = iter;
    bool fresh_hessian = false;
    if (!hessian_initialized && nf > 0) {
      fresh_hessian = true;
      const Subproblem plain =
          BuildSubproblem(s_, problem_, lin, z, Eigen::MatrixXd());
      const Multipliers m = last_multipliers.general.size() == lin.e.rows() &&
                                    last_multipliers.bound_rows.size() ==
                                        static_cast<Eigen::Index>(
                                            plain.bounds.size())
                                ? last_multipliers
                                : InitialMultipliers(lin, plain);
      try {
        hessian = DifferenceHessian(s_, problem_, lin, plain, m, z,
                                    config_.hessian_floor);
      } catch (const EvaluationError&) {
        hessian = Eigen::MatrixXd::Identity(nf, nf);
      }
      hessian_initialized = true;
    }
    const Eigen::MatrixXd regularized =
        hessian + config_.hessian_floor * Eigen::MatrixXd::Identity(nf, nf);
    Subproblem sub = BuildSubproblem(s_, problem_, lin, z, regularized);
    QpSolution qp = SolveQp(sub.qp);
    bool elastic = false;
    if (qp.status != QpStatus::kOptimal) {
      elastic = true;
      qp = SolveElastic(sub.qp, 1e3 * std::max(1.0, penalty_));
      if (qp.status != QpStatus::kOptimal) {
        return finish(SolverStatus::kInfeasibleDetected,
                      "quadratic subproblem could not be solved");
      }
    }
    const Multipliers mult{qp.eq_multipliers, qp.in_multipliers};
    last_multipliers = mult;
    const FullMultipliers full = ExpandMultipliers(s_, lin, sub, mult);

    // First-order conditions at z with the subproblem multipliers.
    const double scale = DualScale(full);
    const double stationarity =
        (nf > 0 ? ReducedLagrangianGradient(s_, lin, sub, mult)
                      .lpNorm<Eigen::Infinity>()
                : 0.0) /
        scale;
    const double eq_violation =
        s_.m > 0 ? lin.eval.residuals.lpNorm<Eigen::Infinity>() : 0.0;
    const double bound_violation = MaxBoundViolation(problem_, z);
    const double complementarity =
        Complementarity(problem_, z, full.bound, s_.kind) / scale;

    result.objective = lin.eval.objective;
    result.max_equality_violation = eq_violation;
    result.max_bound_violation = bound_violation;
    result.stationarity = stationarity;
    result.complementarity = complementarity;
    result.equality_multipliers = full.equality;
    result.bound_multipliers = full.bound;
    result.reduced_hessian = hessian;

    const bool feasible = eq_violation <= config_.feasibility_tolerance &&
                          bound_violation <= config_.feasibility_tolerance;
    if (!elastic && feasible && stationarity <= config_.kkt_tolerance &&
        complementarity <= config_.kkt_tolerance) {
      return finish(SolverStatus::kConverged, "");
    }
    // The subproblem multipliers include the curvature term of the step.
    // Near the noise floor of the merit function the step no longer
    // vanishes, so test first-order multipliers at z directly.
    Multipliers first;
    if (!elastic && feasible && nf > 0 &&
        FirstOrderMultipliers(s_, lin, sub, mult, first)) {
      const FullMultipliers f = ExpandMultipliers(s_, lin, sub, first);
      const double fs = DualScale(f);
      const double fstat =
          ReducedLagrangianGradient(s_, lin, sub, first)
              .lpNorm<Eigen::Infinity>() /
          fs;
      const double fcomp = Complementarity(problem_, z, f.bound, s_.kind) / fs;
            if (fstat <= config_.kkt_tolerance && fcomp <= config_.kkt_tolerance) {
        result.stationarity = fstat;
        result.complementarity = fcomp;
        result.equality_multipliers = f.equality;
        result.bound_multipliers = f.bound;
        return finish(SolverStatus::kConverged, "");
      }
    }

    // Full-space step.
    Eigen::VectorXd step = Eigen::VectorXd::Zero(s_.n);
    Eigen::VectorXd step_basic;
    if (!s_.basic.empty()) step_basic = lin.yc + lin.zb * qp.x;
    for (int k = 0; k < nf; ++k) step[s_.free[k]] = qp.x[k];
    for (size_t k = 0; k < s_.basic.size(); ++k) {
      step[s_.basic[k]] = step_basic[static_cast<Eigen::Index>(k)];
    }

    // Penalty update.
    double largest = 0.0;
    if (full.equality.size() > 0) {
      largest = full.equality.cwiseAbs().maxCoeff();
    }
    for (int j = 0; j < s_.n; ++j) {
      if (s_.kind[j] != VarKind::kFixed) {
        largest = std::max(largest, std::abs(full.bound[j]));
      }
    }
    if (penalty_ < 1.1 * largest) penalty_ = config_.penalty_factor * largest;

    double lin_violation = BoundViolationL1(problem_, z + step);
    if (!s_.general.empty()) {
      Eigen::VectorXd cg(s_.general.size());
      for (size_t k = 0; k < s_.general.size(); ++k) {
        cg[static_cast<Eigen::Index>(k)] = lin.eval.residuals[s_.general[k]];
      }
      Eigen::VectorXd basic_step(s_.basic.size());
      for (size_t k = 0; k < s_.basic.size(); ++k) {
        basic_step[static_cast<Eigen::Index>(k)] = step[s_.basic[k]];
      }
      Eigen::VectorXd lin_res = cg + lin.agn * qp.x;
      if (!s_.basic.empty()) lin_res += lin.agb * basic_step;
      lin_violation += lin_res.lpNorm<1>();
    }
    const double violation0 =
        (s_.m > 0 ? lin.eval.residuals.lpNorm<1>() : 0.0) +
        BoundViolationL1(problem_, z);
    const double reduction = violation0 - lin_violation;
    const double slope = lin.eval.gradient.dot(step);
    const double curvature = 0.5 * qp.x.dot(regularized * qp.x);
    if (reduction > 1e-14 * (1.0 + violation0)) {
      const double required = (slope + curvature) / (0.9 * reduction);
      if (required > penalty_) penalty_ = std::max(required, 1.5 * penalty_);
    }
    const double directional = slope - penalty_ * reduction;
    const double merit0 = Merit(lin.eval, z);

    // Backtracking line search. Each trial point is pulled back onto the
    // defining rows by chord iterations with the current factorization.
    double alpha = 1.0;
    bool accepted = false;
    bool used_projection = false;
    Eigen::VectorXd z_new;
    double merit_new = std::numeric_limits<double>::infinity();
    auto evaluate = [&](const Eigen::VectorXd& zt, NlpEvaluation& e) {
      try {
        e = problem_.Evaluate(zt, false);
        const double v = Merit(e, zt);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
      } catch (const EvaluationError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    auto defining_norm = [&](const NlpEvaluation& e) {
      double worst = 0.0;
      for (int row : s_.defining) {
        worst = std::max(worst, std::abs(e.residuals[row]));
      }
      return worst;
    };
    // Min-norm correction of the general rows through the free variables
    // that stay off their bounds, with the basic variables following.
    const Eigen::VectorXd z_full = z + step;
    std::vector<int> movable;
    for (int k = 0; k < nf; ++k) {
      const int v = s_.free[k];
      const double gap =
          std::min(z_full[v] - problem_.lower_bounds()[v],
                   problem_.upper_bounds()[v] - z_full[v]);
      if (gap > config_.feasibility_tolerance) movable.push_back(k);
    }
    std::optional<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>>
        general_cod;
    auto correct_general = [&](const NlpEvaluation& e,
                               const Eigen::VectorXd& zt) {
      Eigen::VectorXd cd(s_.basic.size());
      for (size_t r = 0; r < s_.defining.size(); ++r) {
        cd[static_cast<Eigen::Index>(r)] = e.residuals[s_.defining[r]];
      }
      const Eigen::VectorXd yc =
          s_.basic.empty() ? Eigen::VectorXd() : Eigen::VectorXd(-lin.lu->solve(cd));
      Eigen::VectorXd rg(s_.general.size());
      for (size_t r = 0; r < s_.general.size(); ++r) {
        rg[static_cast<Eigen::Index>(r)] = e.residuals[s_.general[r]];
      }
      if (!s_.basic.empty()) rg += lin.agb * yc;
      if (!general_cod) {
        Eigen::MatrixXd em(lin.e.rows(), static_cast<Eigen::Index>(movable.size()));
        for (size_t k = 0; k < movable.size(); ++k) {
          em.col(static_cast<Eigen::Index>(k)) = lin.e.col(movable[k]);
        }
        general_cod.emplace(em);
      }
      const Eigen::VectorXd qm = -general_cod->solve(rg);
      Eigen::VectorXd q = Eigen::VectorXd::Zero(nf);
      for (size_t k = 0; k < movable.size(); ++k) {
        q[movable[k]] = qm[static_cast<Eigen::Index>(k)];
      }
      Eigen::VectorXd zc = zt;
      for (int k = 0; k < nf; ++k) zc[s_.free[k]] += q[k];
      if (!s_.basic.empty()) {
        const Eigen::VectorXd db = yc + lin.zb * q;
        for (size_t b = 0; b < s_.basic.size(); ++b) {
          zc[s_.basic[b]] += db[static_cast<Eigen::Index>(b)];
        }
      }
      return zc;
    };
    auto trial = [&](Eigen::VectorXd& zt, bool& projected, bool general) {
      NlpEvaluation e;
      double merit = evaluate(zt, e);
      projected = false;
      if (!std::isfinite(merit)) return merit;
      if (general) {
        Eigen::VectorXd zc = correct_general(e, zt);
        // The correction is second order; a larger one is not trusted.
        if ((zc - zt).lpNorm<Eigen::Infinity>() >
            step.lpNorm<Eigen::Infinity>()) {
          return std::numeric_limits<double>::infinity();
        }
        zt = std::move(zc);
        merit = evaluate(zt, e);
        projected = true;
        if (!std::isfinite(merit)) return merit;
      }
      if (s_.basic.empty()) return merit;
      double norm = defining_norm(e);
      for (int k = 0; k < kProjectionIterations; ++k) {
        if (norm <= kProjectionTolerance * (1.0 + zt.lpNorm<Eigen::Infinity>())) {
          break;
        }
        Eigen::VectorXd cd(s_.basic.size());
        for (size_t r = 0; r < s_.defining.size(); ++r) {
          cd[static_cast<Eigen::Index>(r)] = e.residuals[s_.defining[r]];
        }
        const Eigen::VectorXd correction = -lin.lu->solve(cd);
        Eigen::VectorXd zs = zt;
        for (size_t b = 0; b < s_.basic.size(); ++b) {
          zs[s_.basic[b]] += correction[static_cast<Eigen::Index>(b)];
        }
        NlpEvaluation es;
        const double ms = evaluate(zs, es);
        if (!std::isfinite(ms)) break;
        const double ns = defining_norm(es);
        if (ns >= norm) break;
        zt = std::move(zs);
        e = std::move(es);
        merit = ms;
        norm = ns;
        projected = true;
      }
      return merit;
    };
    if (directional < 0.0) {
      while (alpha >= 1e-8) {
        const double target = merit0 + config_.armijo * alpha * directional;
        Eigen::VectorXd zt = z + alpha * step;
        bool projected = false;
        double mt = trial(zt, projected, false);
        if (mt > target && alpha == 1.0 && !s_.general.empty() &&
            !movable.empty()) {
          // Second-order correction of the general rows.
          zt = z + alpha * step;
          mt = trial(zt, projected, true);
        }
        if (mt <= target) {
          z_new = std::move(zt);
          merit_new = mt;
          accepted = true;
          used_projection = projected;
          break;
        }
        if (alpha == 1.0 && feasible && std::isfinite(mt)) {
          // Close to a solution the merit function differences drop below
          // the rounding noise of the residuals. A full step that lowers
          // the objective and stays well inside the feasibility tolerance
          // is taken regardless.
          NlpEvaluation et;
          evaluate(zt, et);
          const double vt = std::max(
              s_.m > 0 ? et.residuals.lpNorm<Eigen::Infinity>() : 0.0,
              MaxBoundViolation(problem_, zt));
          if (et.objective < lin.eval.objective &&
              vt <= kNoiseFeasibility * config_.feasibility_tolerance) {
            z_new = std::move(zt);
            merit_new = mt;
            accepted = true;
            used_projection = projected;
            break;
          }
        }
        alpha *= 0.5;
      }
    }

    if (!accepted) {
      ++stall;
      if (hessian_initialized && !fresh_hessian) {
        hessian_initialized = false;
      } else {
        // A fresh Hessian did not help either: shorten the step.
        hessian *= 10.0;
      }
      if (stall >= config_.stall_limit) {
        return finish(feasible ? SolverStatus::kMaxIterations
                               : SolverStatus::kInfeasibleDetected,
                      "line search stalled");
      }
      continue;
    }
    if (merit0 - merit_new < 1e-12 * (1.0 + std::abs(merit0))) {
      ++stall;
    } else {
      stall = 0;
    }

    IterationRecord record;
    record.iteration = iter;
    record.objective = lin.eval.objective;
    record.violation = std::max(eq_violation, bound_violation);
    record.stationarity = stationarity;
    record.step_size = alpha;
    record.penalty = penalty_;
    record.merit_before = merit0;
    record.merit_after = merit_new;
    record.elastic = elastic;
    record.projected = used_projection;
    Log(record);

    Linearization next;
    try {
      next = Linearize(s_, problem_.Evaluate(z_new, true));
    } catch (const EvaluationError& e) {
      return finish(SolverStatus::kEvaluationError, e.what());
    }

    if (nf > 0) {
      const Eigen::VectorXd sn = alpha * qp.x;
      const Subproblem sub_next =
          BuildSubproblem(s_, problem_, next, z_new, regularized);
      Eigen::VectorXd y =
          ReducedLagrangianGradient(s_, next, sub_next, mult) -
          ReducedLagrangianGradient(s_, lin, sub, mult);
      const double sy = sn.dot(y);
      const Eigen::VectorXd bs = hessian * sn;
      const double sbs = sn.dot(bs);
      if (sbs > 1e-300) {
        double theta = 1.0;
        if (sy < 0.2 * sbs) theta = 0.8 * sbs / (sbs - sy);
        const Eigen::VectorXd r = theta * y + (1.0 - theta) * bs;
        const double sr = sn.dot(r);
        if (sr > 1e-300) {
          hessian += r * r.transpose() / sr - bs * bs.transpose() / sbs;
          hessian = 0.5 * (hessian + hessian.transpose());
        }
      }
    }
    z = std::move(z_new);
    lin = std::move(next);
  }
  result.iterations = config_.max_iterations;
  return finish(SolverStatus::kMaxIterations, "iteration limit reached");
}

}  // namespace

SolverResult Solve(const NlpProblem& problem, const Eigen::VectorXd& z0,
                   const SolverConfig& config) {
  if (z0.size() != problem.num_variables()) {
    throw std::invalid_argument("initial point has the wrong dimension");
  }
  SqpRun run(problem, config);
  return run.Run(z0, nullptr);
}

SolverResult WarmSolve(const NlpProblem& problem, const SolverResult& previous,
                       const SolverConfig& config) {
  if (previous.z.size() != problem.num_variables()) {
    std::ostringstream os;
    os << "warm start has " << previous.z.size() << " variables, problem has "
       << problem.num_variables();
    throw std::invalid_argument(os.str());
  }
  SqpRun run(problem, config);
  return run.Run(previous.z, &previous);
}

KktResiduals CheckKkt(const NlpProblem& problem, const SolverResult& result) {
  const NlpEvaluation e = problem.Evaluate(result.z, true);
  KktResiduals k;
  FullMultipliers mult{result.equality_multipliers, result.bound_multipliers};
  const double scale = DualScale(mult);
  Eigen::VectorXd stat = e.gradient - result.bound_multipliers;
  if (problem.num_constraints() > 0) {
    stat -= e.jacobian.transpose() * result.equality_multipliers;
  }
  k.stationarity = stat.lpNorm<Eigen::Infinity>() / scale;
  k.feasibility = MaxBoundViolation(problem, result.z);
  if (problem.num_constraints() > 0) {
    k.feasibility =
        std::max(k.feasibility, e.residuals.lpNorm<Eigen::Infinity>());
  }
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  std::vector<VarKind> kind(result.z.size(), VarKind::kFree);
  for (Eigen::Index i = 0; i < result.z.size(); ++i) {
    if (lo[i] == hi[i]) kind[i] = VarKind::kFixed;
    const double nu = result.bound_multipliers[i];
    if (kind[i] == VarKind::kFixed) continue;
    if (nu > 0.0 && !std::isfinite(lo[i])) k.dual_sign = std::max(k.dual_sign, nu);
    if (nu < 0.0 && !std::isfinite(hi[i])) k.dual_sign = std::max(k.dual_sign, -nu);
  }
  k.complementarity =
      Complementarity(problem, result.z, result.bound_multipliers, kind) /
      scale;
  return k;
}

}  // namespace splinehorizon
