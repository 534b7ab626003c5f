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

#include "splinehorizon/validation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "splinehorizon/horizon_planner.h"
#include "splinehorizon/kernels.h"
#include "splinehorizon/sqp_solver.h"

namespace splinehorizon {
namespace {

// Cox-de Boor recursion straight from the definition, right-continuous, with
// the last nonempty span closed.
double ReferenceBasis(const std::vector<double>& t, int i, int order,
                      double x) {
  if (order == 1) {
    const double last = t.back();
    if (t[i] <= x && x < t[i + 1]) return 1.0;
    return x == last && t[i] < x && t[i + 1] == last ? 1.0 : 0.0;
  }
  double value = 0.0;
  const double left = t[i + order - 1] - t[i];
  if (left > 0.0) {
    value += (x - t[i]) / left * ReferenceBasis(t, i, order - 1, x);
  }
  const double right = t[i + order] - t[i + 1];
  if (right > 0.0) {
    value +=
        (t[i + order] - x) / right * ReferenceBasis(t, i + 1, order - 1, x);
  }
  return value;
}

Eigen::VectorXd RandomCoefficients(const KnotLayout& layout,
                                   std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd c(layout.dimension());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = n(rng);
  return c;
}

double Uniform(std::mt19937& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

double DistanceToBreakpoint(const KnotLayout& layout, double tau) {
  double d = std::numeric_limits<double>::infinity();
  for (double b : layout.breakpoints()) d = std::min(d, std::abs(tau - b));
  return d;
}

class Check {
 public:
  Check(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }
  void Observe(double error) {
    if (!(error <= result_.worst)) result_.worst = error;  // NaN propagates
  }
  void Case() { ++result_.cases; }
  CheckResult result() const { return result_; }

 private:
  CheckResult result_;
};

}  // namespace

KnotLayout RandomLayout(std::mt19937& rng, int min_continuity) {
  const int order = std::uniform_int_distribution<int>(2, 8)(rng);
  const double end = Uniform(rng, 0.5, 1.0);
  const int interior = std::uniform_int_distribution<int>(0, 5)(rng);
  std::vector<double> breakpoints{0.0};
  // Spread first, then jitter, so that neighbours stay 0.05 apart.
  const double spacing = end / (interior + 1);
  for (int l = 1; l <= interior; ++l) {
    breakpoints.push_back(l * spacing +
                          Uniform(rng, -0.3, 0.3) * (spacing - 0.05));
  }
  breakpoints.push_back(end);
  std::vector<int> continuities;
  for (int l = 0; l < interior; ++l) {
    const int lo = std::min(min_continuity, order - 1);
    continuities.push_back(
        std::uniform_int_distribution<int>(lo, order - 1)(rng));
  }
  return KnotLayout(std::move(breakpoints), std::move(continuities), order);
}

std::vector<CheckResult> RunSplineSuite(std::uint32_t seed, int layouts) {
  std::mt19937 rng(seed);
  Check unity("partition_of_unity", 1e-12);
  Check negative("basis_non_negative", 1e-14);
  Check reference("basis_matches_recursion", 1e-12);
  Check hull("convex_hull", 1e-12);
  Check linear("linear_precision", 1e-12);
  Check insertion("knot_insertion", 1e-10);
  Check tail("extract_tail", 1e-10);
  Check derivative("derivative_vs_central_differences", 1e-5);
  Check greville("greville_collocation", 1e-10);
  Check combine("sum_and_product", 1e-8);

  for (int n = 0; n < layouts; ++n) {
    const KnotLayout layout = RandomLayout(rng);
    const double end = layout.domain_end();
    const Spline s(layout, RandomCoefficients(layout, rng));
    const double cmin = s.coefficients().minCoeff();
    const double cmax = s.coefficients().maxCoeff();

    for (int k = 0; k < 10; ++k) {
      const double tau = Uniform(rng, 0.0, end);
      const Eigen::VectorXd b = EvalBasis(layout, tau);
      unity.Observe(std::abs(b.sum() - 1.0));
      negative.Observe(std::max(0.0, -b.minCoeff()));
      for (Eigen::Index i = 0; i < b.size(); ++i) {
        reference.Observe(std::abs(
            b[i] - ReferenceBasis(layout.knots(), static_cast<int>(i),
                                  layout.order(), tau)));
      }
      unity.Case();
    }
    negative.Case();
    reference.Case();

    Spline greville_line(layout, Eigen::VectorXd::Zero(layout.dimension()));
    {
      const std::vector<double> xi = layout.GrevilleSites();
      greville_line = Spline(
          layout, Eigen::Map<const Eigen::VectorXd>(xi.data(), xi.size()));
    }
    const double insert_at = Uniform(rng, 0.0, end);
    Spline inserted = s;
    try {
      inserted = InsertKnot(s, insert_at);
    } catch (const std::invalid_argument&) {
      // Full multiplicity at that value; insertion has nothing to do.
    }
    const double offset = Uniform(rng, 0.0, 0.9 * end);
    const Spline cut = ExtractTail(s, offset);
    const std::vector<double> samples =
        kernels::UniformSamples(0.0, end, 1000);
    for (double tau : samples) {
      const double v = s(tau);
      hull.Observe(std::max({0.0, cmin - v, v - cmax}));
      linear.Observe(std::abs(greville_line(tau) - tau));
      insertion.Observe(std::abs(inserted(tau) - v));
      const double sigma = tau * (end - offset) / end;
      tail.Observe(std::abs(cut(sigma) - s(sigma + offset)));
    }
    const HullBounds bounds = ComputeHullBounds(s);
    hull.Observe(std::abs(bounds.lower - cmin) + std::abs(bounds.upper - cmax));
    hull.Case();
    linear.Case();
    insertion.Case();
    tail.Case();

    // Derivatives need continuity of the function itself.
    const KnotLayout smooth = RandomLayout(rng, 1);
    const Spline f(smooth, RandomCoefficients(smooth, rng));
    const Spline df = Differentiate(f);
    const double h = 1e-6;
    for (int k = 0; k < 500; ++k) {
      const double tau = Uniform(rng, 0.0, smooth.domain_end());
      if (DistanceToBreakpoint(smooth, tau) < 2 * h) continue;
      const double fd = (f(tau + h) - f(tau - h)) / (2 * h);
      const double exact = df(tau);
      derivative.Observe(std::abs(fd - exact) / (1.0 + std::abs(exact)));
    }
    derivative.Case();

    {
      const Eigen::MatrixXd a = GrevilleCollocationMatrix(layout);
      const Eigen::VectorXd rhs = RandomCoefficients(layout, rng);
      const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
      greville.Observe((a * x - rhs).cwiseAbs().maxCoeff());
      greville.Case();
    }

    {
      // Operands on one domain: shared ends, distinct interior breakpoints.
      const KnotLayout other = RandomLayout(rng);
      std::vector<double> bp = other.breakpoints();
      for (double& v : bp) v *= end / other.domain_end();
      bp.back() = end;
      std::vector<int> cont = other.continuities();
      for (int& c : cont) c = std::min(c, layout.order() - 1);
      for (size_t l = 1; l + 1 < bp.size(); ++l) {
        if (DistanceToBreakpoint(layout, bp[l]) < 1e-3) bp[l] += 1e-3;
      }
      const KnotLayout second(bp, cont, layout.order());
      const Spline g(second, RandomCoefficients(second, rng));
      const Spline sum = Sum(s, g);
      const Spline product = Product(s, g);
      for (double tau : samples) {
        const double a = s(tau);
        const double b = g(tau);
        const double scale = 1.0 + std::abs(a) + std::abs(b);
        combine.Observe(std::abs(sum(tau) - (a + b)) / scale);
        combine.Observe(std::abs(product(tau) - a * b) / (scale * scale));
      }
      combine.Case();
    }
  }
  return {unity.result(),     negative.result(),  reference.result(),
          hull.result(),      linear.result(),    insertion.result(),
          tail.result(),      derivative.result(), greville.result(),
          combine.result()};
}

double SampledViolation(const TrajectoryProblem& problem,
                        const Eigen::VectorXd& z, int samples) {
  const Scenario& sc = problem.scenario();
  const std::vector<Spline> s = problem.Unpack(z);
  auto block = [&](BlockKind kind, int axis) -> const Spline& {
    return s[problem.BlockIndex(kind, axis)];
  };
  const double t = sc.horizon;
  const double f = HeadingFactor(sc);
  const double ay_max = LateralAccelerationLimit(sc);
  const double end = block(BlockKind::kPosition, 0).layout().domain_end();
  const std::vector<double> taus = kernels::UniformSamples(0.0, end, samples);
  std::vector<std::vector<double>> v(6, std::vector<double>(taus.size()));
  const BlockKind kinds[] = {BlockKind::kPosition, BlockKind::kVelocity,
                             BlockKind::kAcceleration};
  for (int axis = 0; axis < 2; ++axis) {
    for (int d = 0; d < 3; ++d) {
      kernels::EvaluateSamples(block(kinds[d], axis), taus, v[axis * 3 + d]);
    }
  }
  double worst = 0.0;
  for (size_t i = 0; i < taus.size(); ++i) {
    const double x = v[0][i];
    const double vx = v[1][i] / t;
    const double ax = v[2][i] / (t * t);
    const double y = v[3][i];
    const double vy = v[4][i] / t;
    const double ay = v[5][i] / (t * t);
    for (const Obstacle& o : problem.obstacles()) {
      const double dx = x - (o.x + o.velocity_x * t * taus[i]);
      const double dy = y - (o.y + o.velocity_y * t * taus[i]);
      const double sx = sc.ego_diameter_x + o.diameter_x;
      const double sy = sc.ego_diameter_y + o.diameter_y;
      worst = std::max(worst, 0.25 - dx * dx / (sx * sx) - dy * dy / (sy * sy));
    }
    worst = std::max({worst, std::abs(vy) - f * vx, vx - sc.velocity_max,
                      std::abs(ax) - sc.accel_max_x, std::abs(ay) - ay_max});
  }
  return worst;
}

double JacobianError(const TrajectoryProblem& problem,
                     const Eigen::VectorXd& z, double h) {
  const NlpEvaluation e = problem.Evaluate(z, true);
  const Eigen::MatrixXd jac(e.jacobian);
  // Central difference of objective and residuals along column j.
  const auto central = [&](Eigen::Index j, double step, double* g) {
    Eigen::VectorXd zp = z;
    Eigen::VectorXd zm = z;
    zp[j] += step;
    zm[j] -= step;
    const NlpEvaluation ep = problem.Evaluate(zp, false);
    const NlpEvaluation em = problem.Evaluate(zm, false);
    *g = (ep.objective - em.objective) / (2 * step);
    return Eigen::VectorXd((ep.residuals - em.residuals) / (2 * step));
  };
  double worst = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (problem.lower_bounds()[j] == problem.upper_bounds()[j]) continue;
    double g_coarse = 0.0;
    double g_fine = 0.0;
    const Eigen::VectorXd coarse = central(j, h, &g_coarse);
    const Eigen::VectorXd fine = central(j, h / 2, &g_fine);
    const double g = (4 * g_fine - g_coarse) / 3;
    const Eigen::VectorXd col = (4 * fine - coarse) / 3;
    worst = std::max(worst,
                     std::abs(e.gradient[j] - g) / std::max(1.0, std::abs(g)));
    const Eigen::VectorXd err =
        (jac.col(j) - col).cwiseAbs().cwiseQuotient(
            col.cwiseAbs().cwiseMax(1.0));
    worst = std::max(worst, err.maxCoeff());
  }
  return worst;
}

Eigen::VectorXd RandomFeasiblePoint(const Scenario& scenario,
                                    std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-std::log(5.0), std::log(5.0));
  for (int attempt = 0; attempt < 20; ++attempt) {
    Scenario s = scenario;
    s.weights.time_x *= std::exp(u(rng));
    s.weights.time_y *= std::exp(u(rng));
    s.weights.jerk_x *= std::exp(u(rng));
    s.weights.jerk_y *= std::exp(u(rng));
    const PlannerState guess = InitialGuess(s);
    const SolverResult r = Solve(guess.Problem(), guess.z);
    if (r.status == SolverStatus::kConverged) return r.z;
  }
  throw std::runtime_error("no converged solve for random weights");
}

std::vector<CheckResult> RunModelSuite(const Scenario& scenario,
                                       std::uint32_t seed, int points) {
  std::mt19937 rng(seed);
  const PlannerState guess = InitialGuess(scenario);
  const TrajectoryProblem problem = guess.Problem();

  Check jacobian("jacobian_vs_central_differences", 1e-4);
  for (int k = 0; k < points; ++k) {
    jacobian.Observe(JacobianError(problem, RandomFeasiblePoint(scenario, rng),
                                   1e-3));
    jacobian.Case();
  }

  Check continuous("continuous_time_feasibility", 1e-6);
  const SolverResult solved = Solve(problem, guess.z);
  continuous.Observe(solved.status == SolverStatus::kConverged
                         ? SampledViolation(problem, solved.z, 10000)
                         : std::numeric_limits<double>::infinity());
  continuous.Case();

  // Completed random stacks satisfy every defining row.
  Check defining("defining_rows_of_completed_stacks", 1e-13);
  Check pattern("sparsity_pattern_invariance", 0.0);
  std::normal_distribution<double> n(0.0, 0.2);
  Eigen::SparseMatrix<double> reference;
  for (int k = 0; k < points; ++k) {
    Eigen::VectorXd z = guess.z;
    for (int axis = 0; axis < 2; ++axis) {
      const Block& b =
          problem.blocks()[problem.BlockIndex(BlockKind::kPosition, axis)];
      for (int i = 0; i < b.size; ++i) z[b.offset + i] += n(rng);
    }
    z = problem.CompleteAuxiliary(z);
    const NlpEvaluation e = problem.Evaluate(z, true);
    const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
    for (const RowGroup& g : problem.row_groups()) {
      if (g.name == "initial_state" || g.name == "terminal") continue;
      defining.Observe(e.residuals.segment(g.offset, g.size).cwiseAbs().maxCoeff() /
                       scale);
    }
    defining.Case();
    Eigen::SparseMatrix<double> j = e.jacobian;
    j.makeCompressed();
    if (k == 0) {
      reference = j;
    } else {
      const bool same =
          j.nonZeros() == reference.nonZeros() &&
          std::equal(j.outerIndexPtr(), j.outerIndexPtr() + j.cols() + 1,
                     reference.outerIndexPtr()) &&
          std::equal(j.innerIndexPtr(), j.innerIndexPtr() + j.nonZeros(),
                     reference.innerIndexPtr());
      pattern.Observe(same ? 0.0 : 1.0);
    }
    pattern.Case();
  }
  return {jacobian.result(), continuous.result(), defining.result(),
          pattern.result()};
}

}  // namespace splinehorizon
