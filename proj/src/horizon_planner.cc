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

#include "splinehorizon/horizon_planner.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace splinehorizon {
namespace {

// Breakpoints closer than this to the shift offset are crossed exactly.
constexpr double kSnap = 1e-9;
// Tolerance on the objective guard for accepting a warm-started solve.
constexpr double kObjectiveSlack = 1e-8;

// Polynomial in t with monomial coefficients, then linear continuation from
// t_end on.
struct Guess1d {
  Eigen::VectorXd c;
  double t_end;

  double Position(double t) const {
    if (t <= t_end) {
      double s = 0.0;
      for (Eigen::Index k = c.size() - 1; k >= 0; --k) s = s * t + c[k];
      return s;
    }
    double p = 0.0;
    double v = 0.0;
    for (Eigen::Index k = c.size() - 1; k >= 0; --k) p = p * t_end + c[k];
    for (Eigen::Index k = c.size() - 1; k >= 1; --k) {
      v = v * t_end + static_cast<double>(k) * c[k];
    }
    return p + v * (t - t_end);
  }
};

// Quartic from (p0, v0, a0) to (v1, 0) at d: the minimum-jerk quintic with
// free end position has a vanishing fifth-order coefficient.
Guess1d Longitudinal(const AxisState& s, double v1, double d) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c[0] = s.position;
  c[1] = s.velocity;
  c[2] = 0.5 * s.acceleration;
  Eigen::Matrix2d m;
  m << 3 * d * d, 4 * d * d * d, 6 * d, 12 * d * d;
  const Eigen::Vector2d rhs(v1 - s.velocity - s.acceleration * d,
                            -s.acceleration);
  c.segment(3, 2) = m.fullPivLu().solve(rhs);
  return {c, d};
}

// Quintic from (p0, v0, a0) to rest at the origin at d.
Guess1d Lateral(const AxisState& s, double d) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c[0] = s.position;
  c[1] = s.velocity;
  c[2] = 0.5 * s.acceleration;
  Eigen::Matrix3d m;
  m << std::pow(d, 3), std::pow(d, 4), std::pow(d, 5), 3 * d * d,
      4 * std::pow(d, 3), 5 * std::pow(d, 4), 6 * d, 12 * d * d,
      20 * std::pow(d, 3);
  const Eigen::Vector3d rhs(
      -(s.position + s.velocity * d + 0.5 * s.acceleration * d * d),
      -(s.velocity + s.acceleration * d), -s.acceleration);
  c.tail(3) = m.fullPivLu().solve(rhs);
  return {c, d};
}

// Bounds on spline coefficients only. Interval and domain-end bounds are
// not counted.
bool AnyActive(const TrajectoryProblem& problem, const SolverResult& r) {
  const Eigen::VectorXd& lo = problem.lower_bounds();
  const Eigen::VectorXd& hi = problem.upper_bounds();
  for (Eigen::Index i = 0; i < problem.interval_variable(0); ++i) {
    if (lo[i] == hi[i]) continue;
    if (std::abs(r.bound_multipliers[i]) > kActiveMultiplier) return true;
  }
  return false;
}

// Normalized p, v, a of an axis at tau = 0 of the stored solution.
AxisState NormalizedOrigin(const PlannerState& s, Axis axis) {
  const double t = s.scenario.horizon;
  const AxisState& a = axis == Axis::kX ? s.ego.x : s.ego.y;
  return {a.position, a.velocity * t, a.acceleration * t * t};
}

void UpdateManifoldFlags(PlannerState& s) {
  const AxisState x = NormalizedOrigin(s, Axis::kX);
  const AxisState y = NormalizedOrigin(s, Axis::kY);
  const double vt = s.scenario.target_velocity * s.scenario.horizon;
  s.lon_reached = std::abs(x.velocity - vt) <= kManifoldTolerance &&
                  std::abs(x.acceleration) <= kManifoldTolerance;
  s.lat_reached = std::abs(y.position) <= kManifoldTolerance &&
                  std::abs(y.velocity) <= kManifoldTolerance &&
                  std::abs(y.acceleration) <= kManifoldTolerance;
}

AxisState Coast(const AxisState& s, double dt) {
  return {s.position + s.velocity * dt, s.velocity, s.acceleration};
}

}  // namespace

std::string ToString(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kOptimizing:
      return "optimizing";
    case PlannerMode::kFollow:
      return "follow";
    case PlannerMode::kCoast:
      return "coast";
  }
  return "unknown";
}

TrajectoryProblem PlannerState::Problem() const {
  return TrajectoryProblem(scenario, plan, ego, obstacles);
}

PlannerState InitialGuess(const Scenario& scenario) {
  Validate(scenario);
  const double horizon = scenario.horizon;
  const bool lon_first = scenario.ordering == Ordering::kLon;
  const double t_first =
      lon_first ? scenario.guess_time_lon : scenario.guess_time_lat;
  const double t_second =
      lon_first ? scenario.guess_time_lat : scenario.guess_time_lon;
  const double t_end = std::max(t_first, t_second);
  const Axis first = lon_first ? Axis::kX : Axis::kY;
  const Axis second = lon_first ? Axis::kY : Axis::kX;
  const int nu_first = lon_first ? scenario.nu_x : scenario.nu_y;
  const int nu_second = lon_first ? scenario.nu_y : scenario.nu_x;

  // The last interior breakpoint of the first axis marks where it reaches
  // its manifold; the second axis spreads its breakpoints over its span.
  std::vector<std::pair<double, Axis>> interior;
  for (int k = 1; k <= nu_first; ++k) {
    interior.emplace_back(k * t_first / nu_first / horizon, first);
  }
  for (int k = 1; k <= nu_second; ++k) {
    interior.emplace_back(k * t_second / (nu_second + 1) / horizon, second);
  }
  std::stable_sort(interior.begin(), interior.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  PlannerState state;
  state.scenario = scenario;
  double previous = 0.0;
  for (const auto& [value, axis] : interior) {
    state.plan.intervals.push_back(value - previous);
    state.plan.tags.push_back(axis);
    previous = value;
  }
  state.plan.intervals.push_back(t_end / horizon - previous);
  state.plan.frozen.assign(state.plan.intervals.size(), false);
  for (double d : state.plan.intervals) {
    if (d < scenario.min_interval) {
      std::ostringstream os;
      os << "planner.min_interval: initial breakpoints are " << d
         << " apart, below min_interval = " << scenario.min_interval;
      throw ScenarioError(os.str());
    }
  }

  state.ego = {scenario.ego_x, scenario.ego_y};
  state.obstacles = scenario.obstacles;
  const TrajectoryProblem problem = state.Problem();

  const Guess1d gx = Longitudinal(scenario.ego_x, scenario.target_velocity,
                                  scenario.guess_time_lon);
  const Guess1d gy = Lateral(scenario.ego_y, scenario.guess_time_lat);
  const std::vector<KnotLayout> layouts = problem.Layouts(state.plan.intervals);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.num_variables());
  for (int axis = 0; axis < 2; ++axis) {
    const Guess1d& g = axis == 0 ? gx : gy;
    const int b = problem.BlockIndex(BlockKind::kPosition, axis);
    const Spline s = InterpolateAtGreville(
        layouts[b], [&](double tau, Side) { return g.Position(tau * horizon); });
    z.segment(problem.blocks()[b].offset, problem.blocks()[b].size) =
        s.coefficients();
  }
  for (int g = 0; g < problem.num_intervals(); ++g) {
    z[problem.interval_variable(g)] = state.plan.intervals[g];
  }
  state.z = problem.CompleteAuxiliary(z);
  UpdateManifoldFlags(state);
  return state;
}

double PlanSnapshot::Evaluate(Axis axis, int derivative, double t) const {
  const double tau = std::clamp((t - time) / horizon, 0.0, end());
  const Spline& s = ego[static_cast<int>(axis) * 4 + derivative];
  return s(tau, tau >= end() ? Side::kLeft : Side::kRight) /
         std::pow(horizon, derivative);
}

PlanSnapshot Snapshot(const PlannerState& state) {
  PlanSnapshot snap;
  snap.time = state.time;
  snap.horizon = state.scenario.horizon;
  snap.plan = state.plan;
  if (state.mode == PlannerMode::kCoast) return snap;
  const TrajectoryProblem problem = state.Problem();
  const std::vector<Spline> splines = problem.Unpack(state.z);
  for (int axis = 0; axis < 2; ++axis) {
    for (int k = 0; k < 4; ++k) {
      snap.ego.push_back(splines[problem.BlockIndex(
          static_cast<BlockKind>(static_cast<int>(BlockKind::kPosition) + k),
          axis)]);
    }
  }
  return snap;
}

PlannerState Advance(const PlannerState& state) {
  const Scenario& sc = state.scenario;
  const double horizon = sc.horizon;
  const double dt = sc.time_step;
  PlannerState next = state;
  next.time = state.time + dt;

  if (state.mode == PlannerMode::kCoast) {
    next.ego = {Coast(state.ego.x, dt), Coast(state.ego.y, dt)};
    for (Obstacle& o : next.obstacles) o = Propagate(o, dt);
    UpdateManifoldFlags(next);
    return next;
  }

  const TrajectoryProblem problem = state.Problem();
  const std::vector<Spline> splines = problem.Unpack(state.z);
  const double remaining = state.plan.end();
  double offset = dt / horizon;

  auto axis_state = [&](const std::vector<Spline>& s, int axis, double tau,
                        Side side) {
    const int p = problem.BlockIndex(BlockKind::kPosition, axis);
    return AxisState{s[p](tau, side), s[p + 1](tau, side) / horizon,
                     s[p + 2](tau, side) / (horizon * horizon)};
  };

  if (offset >= remaining - kSnap) {
    // Finish the stored trajectory, then keep the terminal velocity.
    const double rest = (offset - remaining) * horizon;
    next.ego = {Coast(axis_state(splines, 0, remaining, Side::kLeft), rest),
                Coast(axis_state(splines, 1, remaining, Side::kLeft), rest)};
    for (Obstacle& o : next.obstacles) o = Propagate(o, dt);
    next.mode = PlannerMode::kCoast;
    next.has_last = false;
    UpdateManifoldFlags(next);
    return next;
  }

  const std::vector<double> values = state.plan.Values();
  for (size_t l = 1; l + 1 < values.size(); ++l) {
    if (std::abs(values[l] - offset) <= kSnap) offset = values[l];
  }

  std::vector<Spline> tail;
  tail.reserve(splines.size());
  for (const Spline& s : splines) tail.push_back(ExtractTail(s, offset));

  // Interval g of the new plan is the remainder of interval first + g.
  int first = 0;
  while (first + 1 < static_cast<int>(values.size()) - 1 &&
         values[first + 1] <= offset) {
    ++first;
  }
  BreakpointPlan plan;
  for (size_t g = first; g < state.plan.intervals.size(); ++g) {
    plan.intervals.push_back(
        g == static_cast<size_t>(first) ? values[g + 1] - offset
                                        : state.plan.intervals[g]);
    plan.frozen.push_back(state.plan.frozen[g]);
    if (g + 1 < state.plan.intervals.size()) {
      plan.tags.push_back(state.plan.tags[g]);
    }
  }
  if (plan.intervals.front() < sc.min_interval) plan.frozen.front() = true;

  next.plan = plan;
  next.ego = {axis_state(tail, 0, 0.0, Side::kRight),
              axis_state(tail, 1, 0.0, Side::kRight)};
  for (Obstacle& o : next.obstacles) o = Propagate(o, offset * horizon);
  next.z = next.Problem().Pack(tail, plan.intervals);
  if (plan.AllFrozen()) next.mode = PlannerMode::kFollow;
  UpdateManifoldFlags(next);
  return next;
}

SolverResult DefaultSolve(const NlpProblem& problem, const SolverResult& warm,
                          const SolverConfig& config) {
  if (warm.equality_multipliers.size() == 0) {
    return Solve(problem, warm.z, config);
  }
  return WarmSolve(problem, warm, config);
}

StepOutcome PlanStep(PlannerState& state, const PlannerOptions& options) {
  StepOutcome out;
  if (state.lon_reached && state.lat_reached) {
    // Nothing left to plan: the ego already drives on both manifolds.
    state.mode = PlannerMode::kCoast;
    state.has_last = false;
  }
  if (state.mode == PlannerMode::kCoast) {
    out.status = "coast";
    return out;
  }
  const TrajectoryProblem problem = state.Problem();
  out.warm_objective = problem.Objective(state.z);
  out.warm_violation = problem.MaxViolation(state.z);
  out.objective = out.warm_objective;
  if (state.mode == PlannerMode::kFollow) {
    out.status = "follow";
    return out;
  }

  const Scenario& sc = state.scenario;
  SolverConfig config;
  config.kkt_tolerance = sc.solver.kkt_tolerance;
  config.feasibility_tolerance = sc.solver.feasibility_tolerance;
  config.max_iterations = sc.solver.max_iterations;
  config.log = options.solver_log;

  SolverResult warm;
  if (state.has_last &&
      state.last.z.size() == problem.num_variables() &&
      state.last.equality_multipliers.size() == problem.num_constraints()) {
    warm = state.last;
  }
  warm.z = state.z;

  SolverResult result;
  out.solved = true;
  try {
    result = options.solve(problem, warm, config);
  } catch (const std::exception& e) {
    out.status = std::string("error: ") + e.what();
    out.active = true;
    return out;
  }
  out.iterations = result.iterations;
  out.solve_seconds = result.wall_time_seconds;

  const bool warm_feasible =
      out.warm_violation <= sc.solver.feasibility_tolerance;
  out.accepted =
      result.status == SolverStatus::kConverged &&
      (!warm_feasible ||
       result.objective <= out.warm_objective + kObjectiveSlack);
  if (out.accepted) {
    state.z = result.z;
    state.plan = problem.PlanOf(result.z);
    state.last = result;
    state.has_last = true;
    out.status = ToString(result.status);
    out.objective = result.objective;
    out.active = AnyActive(problem, result);
  } else {
    out.status = "fallback (" + ToString(result.status) + ")";
    out.active = true;
  }
  UpdateManifoldFlags(state);
  return out;
}

SimulationLog RunClosedLoop(const Scenario& scenario,
                            const RunOptions& options) {
  PlannerState state = InitialGuess(scenario);
  const bool until_coast = options.steps < 0;
  const int steps =
      until_coast
          ? static_cast<int>(std::lround(scenario.horizon / scenario.time_step))
          : options.steps;
  SimulationLog log;
  for (int k = 0;; ++k) {
    StepRecord rec;
    rec.step = k;
    rec.time = k * scenario.time_step;
    rec.state = state.ego;
    rec.outcome = PlanStep(state, options.planner);
    rec.mode = state.mode;
    rec.breakpoints = state.plan.Values();
    rec.tags = state.plan.tags;
    rec.frozen = state.plan.frozen;
    rec.lon_reached = state.lon_reached;
    rec.lat_reached = state.lat_reached;
    log.plans.push_back(Snapshot(state));
    log.obstacles.push_back(state.obstacles);
    log.steps.push_back(std::move(rec));
    if (k >= steps) break;
    if (until_coast && state.mode == PlannerMode::kCoast) break;
    state = Advance(state);
  }
  return log;
}

}  // namespace splinehorizon
