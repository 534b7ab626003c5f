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

#include "splinehorizon/trajectory_problem.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "splinehorizon/kernels.h"

namespace splinehorizon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Difference step relative to the interval length.
constexpr double kIntervalStep = 1e-3;
constexpr int kAxisKinds = 5;
constexpr int kObstacleBlocks = 7;

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Sites {
  std::vector<double> tau;
  std::vector<Side> side;
};

Sites GrevilleOf(const KnotLayout& layout) {
  return {layout.GrevilleSites(), layout.GrevilleSides()};
}

// Basis windows of `source` at the Greville sites of `target`, padded with
// zeros to every source span the site can occupy while it stays inside
// [t_{r+1}, t_{r+k-1}]. The padding keeps the sparsity pattern independent of
// the breakpoint values.
std::vector<BasisWindow> Windows(const KnotLayout& source,
                                 const KnotLayout& target) {
  const Sites sites = GrevilleOf(target);
  std::vector<BasisWindow> w;
  w.reserve(sites.tau.size());
  for (size_t r = 0; r < sites.tau.size(); ++r) {
    w.push_back(EvalBasisWindow(source, sites.tau[r], sites.side[r]));
  }
  const std::vector<double>& t = target.knots();
  const int k = target.order();
  for (size_t r = 0; r < w.size(); ++r) {
    const double a = t[r + 1];
    const double b = t[r + k - 1];
    const int first = EvalBasisWindow(source, a, Side::kRight).first;
    const int last =
        EvalBasisWindow(source, b, b > 0.0 ? Side::kLeft : Side::kRight).first +
        source.order();
    const int lo = std::min(first, w[r].first);
    const int hi =
        std::max(last, w[r].first + static_cast<int>(w[r].values.size()));
    std::vector<double> values(hi - lo, 0.0);
    std::copy(w[r].values.begin(), w[r].values.end(),
              values.begin() + (w[r].first - lo));
    w[r] = {lo, std::move(values)};
  }
  return w;
}

double Dot(const BasisWindow& w, const Eigen::VectorXd& z, int offset) {
  double s = 0.0;
  for (size_t k = 0; k < w.values.size(); ++k) {
    s += w.values[k] * z[offset + w.first + static_cast<int>(k)];
  }
  return s;
}

void Emit(Triplets* t, int row, const BasisWindow& w, int offset,
          double scale) {
  if (t == nullptr) return;
  // Explicit zeros keep the sparsity pattern independent of the values.
  for (size_t k = 0; k < w.values.size(); ++k) {
    t->emplace_back(row, offset + w.first + static_cast<int>(k),
                    scale * w.values[k]);
  }
}

std::string AxisName(int axis) { return axis == 0 ? "x" : "y"; }

}  // namespace

int BreakpointPlan::count(Axis axis) const {
  int n = 0;
  for (Axis a : tags) n += a == axis;
  return n;
}

double BreakpointPlan::end() const {
  return std::accumulate(intervals.begin(), intervals.end(), 0.0);
}

std::vector<double> BreakpointPlan::Values() const {
  std::vector<double> v{0.0};
  for (double d : intervals) v.push_back(v.back() + d);
  return v;
}

std::vector<double> BreakpointPlan::AxisBreakpoints(Axis axis) const {
  const std::vector<double> v = Values();
  std::vector<double> out{0.0};
  for (size_t l = 0; l < tags.size(); ++l) {
    if (tags[l] == axis) out.push_back(v[l + 1]);
  }
  out.push_back(v.back());
  return out;
}

bool BreakpointPlan::AllFrozen() const {
  for (bool f : frozen) {
    if (!f) return false;
  }
  return true;
}

void BreakpointPlan::Check() const {
  if (intervals.size() != tags.size() + 1 ||
      frozen.size() != intervals.size()) {
    throw std::invalid_argument(
        "breakpoint plan needs one interval and one frozen flag more than "
        "interior breakpoints");
  }
  for (double d : intervals) {
    if (!(d > 0.0)) {
      throw std::invalid_argument("breakpoint intervals must be positive");
    }
  }
  if (end() > 1.0 + 1e-12) {
    throw std::invalid_argument("breakpoint plan ends beyond tau = 1");
  }
}

std::string ToString(BlockKind kind) {
  switch (kind) {
    case BlockKind::kPosition:
      return "position";
    case BlockKind::kVelocity:
      return "velocity";
    case BlockKind::kAcceleration:
      return "acceleration";
    case BlockKind::kJerk:
      return "jerk";
    case BlockKind::kJerkSquared:
      return "jerk_squared";
    case BlockKind::kRefit:
      return "obstacle_position";
    case BlockKind::kDifference:
      return "difference";
    case BlockKind::kDifferenceSquared:
      return "difference_squared";
    case BlockKind::kEllipse:
      return "ellipse";
    case BlockKind::kHeadingUpper:
      return "heading_upper";
    case BlockKind::kHeadingLower:
      return "heading_lower";
  }
  return "unknown";
}

TrajectoryProblem::TrajectoryProblem(const Scenario& scenario,
                                     BreakpointPlan plan,
                                     const EgoState& state,
                                     std::vector<Obstacle> obstacles)
    : scenario_(scenario),
      plan_(std::move(plan)),
      state_(state),
      obstacles_(std::move(obstacles)) {
  Validate(scenario_);
  plan_.Check();
  heading_factor_ = HeadingFactor(scenario_);
  for (const Obstacle& o : obstacles_) {
    if (!(o.diameter_x > 0.0 && o.diameter_y > 0.0)) {
      throw ScenarioError("obstacle " + o.id + ": diameters must be positive");
    }
    obstacle_splines_.push_back(PredictObstacle(o, Axis::kX, scenario_.horizon));
    obstacle_splines_.push_back(PredictObstacle(o, Axis::kY, scenario_.horizon));
  }

  const std::vector<KnotLayout> layouts = Layouts(plan_.intervals);
  const int m = num_obstacles();
  int offset = 0;
  auto add = [&](BlockKind kind, int axis, int obstacle) {
    const int size = layouts[blocks_.size()].dimension();
    blocks_.push_back({kind, axis, obstacle, offset, size});
    offset += size;
  };
  // Block order must match Layouts().
  for (int axis = 0; axis < 2; ++axis) {
    add(BlockKind::kPosition, axis, -1);
    add(BlockKind::kVelocity, axis, -1);
    add(BlockKind::kAcceleration, axis, -1);
    add(BlockKind::kJerk, axis, -1);
    add(BlockKind::kJerkSquared, axis, -1);
  }
  for (int o = 0; o < m; ++o) {
    add(BlockKind::kRefit, 0, o);
    add(BlockKind::kRefit, 1, o);
    add(BlockKind::kDifference, 0, o);
    add(BlockKind::kDifference, 1, o);
    add(BlockKind::kDifferenceSquared, 0, o);
    add(BlockKind::kDifferenceSquared, 1, o);
    add(BlockKind::kEllipse, 0, o);
  }
  add(BlockKind::kHeadingUpper, 0, -1);
  add(BlockKind::kHeadingLower, 0, -1);
  num_intervals_ = plan_.interior_count() + 1;
  interval_offset_ = offset;
  num_variables_ = offset + num_intervals_ + 1;

  // Rows: one defining group per non-position block, in block order.
  int row = 0;
  defining_rows_.assign(blocks_.size(), -1);
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    if (blk.kind == BlockKind::kPosition) continue;
    std::string name = ToString(blk.kind);
    if (blk.kind != BlockKind::kEllipse &&
        blk.kind != BlockKind::kHeadingUpper &&
        blk.kind != BlockKind::kHeadingLower) {
      name += "_" + AxisName(blk.axis);
    }
    if (blk.obstacle >= 0) name += "[" + obstacles_[blk.obstacle].id + "]";
    defining_rows_[b] = row;
    row_groups_.push_back({name, row, blk.size});
    row += blk.size;
  }
  end_row_ = row;
  row_groups_.push_back({"domain_end", row, 1});
  row += 1;
  row_groups_.push_back({"initial_state", row, 6});
  row += 6;
  const int terminal =
      2 * static_cast<int>(TerminalIndices(Axis::kX).size()) +
      3 * static_cast<int>(TerminalIndices(Axis::kY).size());
  row_groups_.push_back({"terminal", row, terminal});
  row += terminal;
  num_constraints_ = row;

  lower_ = Eigen::VectorXd::Constant(num_variables_, -kInf);
  upper_ = Eigen::VectorXd::Constant(num_variables_, kInf);
  const double t = scenario_.horizon;
  const double lat = LateralAccelerationLimit(scenario_);
  for (const Block& blk : blocks_) {
    auto seg_lo = lower_.segment(blk.offset, blk.size);
    auto seg_hi = upper_.segment(blk.offset, blk.size);
    switch (blk.kind) {
      case BlockKind::kVelocity:
        if (blk.axis == 0) seg_hi.setConstant(scenario_.velocity_max * t);
        break;
      case BlockKind::kAcceleration: {
        const double a = (blk.axis == 0 ? scenario_.accel_max_x : lat) * t * t;
        seg_lo.setConstant(-a);
        seg_hi.setConstant(a);
        break;
      }
      case BlockKind::kEllipse:
      case BlockKind::kHeadingUpper:
      case BlockKind::kHeadingLower:
        seg_lo.setZero();
        break;
      default:
        break;
    }
  }
  for (int g = 0; g < num_intervals_; ++g) {
    if (plan_.frozen[g]) {
      lower_[interval_variable(g)] = plan_.intervals[g];
      upper_[interval_variable(g)] = plan_.intervals[g];
    } else {
      lower_[interval_variable(g)] = scenario_.min_interval;
    }
  }
  upper_[end_variable()] = 1.0;
}

int TrajectoryProblem::BlockIndex(BlockKind kind, int axis,
                                  int obstacle) const {
  switch (kind) {
    case BlockKind::kPosition:
    case BlockKind::kVelocity:
    case BlockKind::kAcceleration:
    case BlockKind::kJerk:
    case BlockKind::kJerkSquared:
      return axis * kAxisKinds + static_cast<int>(kind);
    case BlockKind::kRefit:
      return 2 * kAxisKinds + obstacle * kObstacleBlocks + axis;
    case BlockKind::kDifference:
      return 2 * kAxisKinds + obstacle * kObstacleBlocks + 2 + axis;
    case BlockKind::kDifferenceSquared:
      return 2 * kAxisKinds + obstacle * kObstacleBlocks + 4 + axis;
    case BlockKind::kEllipse:
      return 2 * kAxisKinds + obstacle * kObstacleBlocks + 6;
    case BlockKind::kHeadingUpper:
      return 2 * kAxisKinds + num_obstacles() * kObstacleBlocks;
    case BlockKind::kHeadingLower:
      return 2 * kAxisKinds + num_obstacles() * kObstacleBlocks + 1;
  }
  return -1;
}

std::vector<int> TrajectoryProblem::TerminalIndices(Axis axis) const {
  const int nu = plan_.count(axis);
  const bool first = (axis == Axis::kX) == (scenario_.ordering == Ordering::kLon);
  std::vector<int> out;
  if (first && nu > 0) out.push_back(nu);
  out.push_back(nu + 1);
  return out;
}

AxisState TrajectoryProblem::NormalizedState(Axis axis) const {
  const AxisState& s = axis == Axis::kX ? state_.x : state_.y;
  const double t = scenario_.horizon;
  return {s.position, s.velocity * t, s.acceleration * t * t};
}

std::vector<double> TrajectoryProblem::Intervals(
    const Eigen::VectorXd& z) const {
  std::vector<double> d(num_intervals_);
  for (int g = 0; g < num_intervals_; ++g) d[g] = z[interval_variable(g)];
  return d;
}

BreakpointPlan TrajectoryProblem::PlanOf(const Eigen::VectorXd& z) const {
  BreakpointPlan p = plan_;
  p.intervals = Intervals(z);
  return p;
}

std::vector<KnotLayout> TrajectoryProblem::Layouts(
    const std::vector<double>& intervals) const {
  BreakpointPlan p = plan_;
  p.intervals = intervals;
  std::vector<KnotLayout> out;
  out.reserve(2 * kAxisKinds + kObstacleBlocks * obstacles_.size() + 2);
  std::vector<KnotLayout> pos, vel, square;
  for (int axis = 0; axis < 2; ++axis) {
    const std::vector<double> bp = p.AxisBreakpoints(static_cast<Axis>(axis));
    const size_t interior = bp.size() - 2;
    pos.emplace_back(bp, std::vector<int>(interior, kPositionContinuity),
                     kPositionOrder);
    out.push_back(pos.back());
    for (int k = 1; k <= 3; ++k) {
      out.emplace_back(bp, std::vector<int>(interior, kPositionContinuity - k),
                       kPositionOrder - k);
    }
    vel.push_back(out[axis * kAxisKinds + 1]);
    out.push_back(CombineProductLayout(out.back(), out.back()));
    square.push_back(CombineProductLayout(pos.back(), pos.back()));
  }
  const KnotLayout ellipse = CombineSumLayout(square[0], square[1]);
  for (size_t m = 0; m < obstacles_.size(); ++m) {
    out.push_back(pos[0]);
    out.push_back(pos[1]);
    out.push_back(pos[0]);
    out.push_back(pos[1]);
    out.push_back(square[0]);
    out.push_back(square[1]);
    out.push_back(ellipse);
  }
  const KnotLayout heading = CombineSumLayout(vel[0], vel[1]);
  out.push_back(heading);
  out.push_back(heading);
  return out;
}

std::vector<Spline> TrajectoryProblem::Unpack(const Eigen::VectorXd& z) const {
  const std::vector<KnotLayout> layouts = Layouts(Intervals(z));
  std::vector<Spline> out;
  out.reserve(blocks_.size());
  for (size_t b = 0; b < blocks_.size(); ++b) {
    out.emplace_back(layouts[b], z.segment(blocks_[b].offset, blocks_[b].size));
  }
  return out;
}

Eigen::VectorXd TrajectoryProblem::Pack(
    const std::vector<Spline>& splines,
    const std::vector<double>& intervals) const {
  if (splines.size() != blocks_.size() ||
      static_cast<int>(intervals.size()) != num_intervals_) {
    throw std::invalid_argument("spline stack does not match the problem");
  }
  Eigen::VectorXd z(num_variables_);
  for (size_t b = 0; b < blocks_.size(); ++b) {
    if (splines[b].layout().dimension() != blocks_[b].size) {
      throw std::invalid_argument("block " + ToString(blocks_[b].kind) +
                                  " has the wrong dimension");
    }
    z.segment(blocks_[b].offset, blocks_[b].size) = splines[b].coefficients();
  }
  double end = 0.0;
  for (int g = 0; g < num_intervals_; ++g) {
    z[interval_variable(g)] = intervals[g];
    end += intervals[g];
  }
  z[end_variable()] = end;
  return z;
}

Eigen::VectorXd TrajectoryProblem::CompleteAuxiliary(
    const Eigen::VectorXd& z) const {
  Eigen::VectorXd out = z;
  const std::vector<double> intervals = Intervals(z);
  out[end_variable()] = std::accumulate(intervals.begin(), intervals.end(), 0.0);
  const std::vector<KnotLayout> layouts = Layouts(intervals);
  auto set = [&](int b, const Eigen::VectorXd& c) {
    out.segment(blocks_[b].offset, blocks_[b].size) = c;
  };
  auto spline = [&](int b) {
    return Spline(layouts[b], out.segment(blocks_[b].offset, blocks_[b].size));
  };
  for (int axis = 0; axis < 2; ++axis) {
    for (int k = 0; k < 3; ++k) {
      const int src = axis * kAxisKinds + k;
      const LinearTransform t = DerivativeTransform(layouts[src]);
      set(src + 1, t.matrix * out.segment(blocks_[src].offset,
                                          blocks_[src].size));
    }
    const Spline jerk = spline(BlockIndex(BlockKind::kJerk, axis));
    const int q = BlockIndex(BlockKind::kJerkSquared, axis);
    set(q, InterpolateAtGreville(layouts[q], [&](double s, Side side) {
             const double v = jerk(s, side);
             return v * v;
           }).coefficients());
  }
  for (int m = 0; m < num_obstacles(); ++m) {
    const double ax = scenario_.ego_diameter_x + obstacles_[m].diameter_x;
    const double ay = scenario_.ego_diameter_y + obstacles_[m].diameter_y;
    for (int axis = 0; axis < 2; ++axis) {
      const int r = BlockIndex(BlockKind::kRefit, axis, m);
      const Spline& pred = obstacle_splines_[2 * m + axis];
      set(r, InterpolateAtGreville(layouts[r], [&](double s, Side side) {
               return pred(s, side);
             }).coefficients());
      const int p = BlockIndex(BlockKind::kPosition, axis);
      set(BlockIndex(BlockKind::kDifference, axis, m),
          out.segment(blocks_[p].offset, blocks_[p].size) -
              out.segment(blocks_[r].offset, blocks_[r].size));
      const Spline diff = spline(BlockIndex(BlockKind::kDifference, axis, m));
      const int sq = BlockIndex(BlockKind::kDifferenceSquared, axis, m);
      set(sq, InterpolateAtGreville(layouts[sq], [&](double s, Side side) {
                const double v = diff(s, side);
                return v * v;
              }).coefficients());
    }
    const Spline sx = spline(BlockIndex(BlockKind::kDifferenceSquared, 0, m));
    const Spline sy = spline(BlockIndex(BlockKind::kDifferenceSquared, 1, m));
    const int e = BlockIndex(BlockKind::kEllipse, 0, m);
    set(e, InterpolateAtGreville(layouts[e], [&](double s, Side side) {
             return sx(s, side) / (ax * ax) + sy(s, side) / (ay * ay) - 0.25;
           }).coefficients());
  }
  const Spline vx = spline(BlockIndex(BlockKind::kVelocity, 0));
  const Spline vy = spline(BlockIndex(BlockKind::kVelocity, 1));
  const double f = heading_factor_;
  const int ub = BlockIndex(BlockKind::kHeadingUpper);
  const int lb = BlockIndex(BlockKind::kHeadingLower);
  set(ub, InterpolateAtGreville(layouts[ub], [&](double s, Side side) {
            return f * vx(s, side) - vy(s, side);
          }).coefficients());
  set(lb, InterpolateAtGreville(layouts[lb], [&](double s, Side side) {
            return f * vx(s, side) + vy(s, side);
          }).coefficients());
  return out;
}

double TrajectoryProblem::Assemble(const Eigen::VectorXd& z,
                                   Eigen::VectorXd& r, Triplets* jac,
                                   Eigen::VectorXd* gradient) const {
  const std::vector<double> intervals = Intervals(z);
  for (double d : intervals) {
    if (!(d > 0.0)) throw EvaluationError("non-positive breakpoint interval");
  }
  const std::vector<KnotLayout> layouts = Layouts(intervals);
  r.resize(num_constraints_);
  auto off = [&](int b) { return blocks_[b].offset; };

  int row = 0;
  for (int axis = 0; axis < 2; ++axis) {
    // Derivative coupling.
    for (int k = 0; k < 3; ++k) {
      const int src = axis * kAxisKinds + k;
      const int dst = src + 1;
      const LinearTransform t = DerivativeTransform(layouts[src]);
      r.segment(row, blocks_[dst].size) =
          t.matrix * z.segment(off(src), blocks_[src].size) -
          z.segment(off(dst), blocks_[dst].size);
      if (jac) {
        for (int col = 0; col < t.matrix.outerSize(); ++col) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(t.matrix, col); it;
               ++it) {
            jac->emplace_back(row + static_cast<int>(it.row()),
                              off(src) + col, it.value());
          }
        }
        for (int i = 0; i < blocks_[dst].size; ++i) {
          jac->emplace_back(row + i, off(dst) + i, -1.0);
        }
      }
      row += blocks_[dst].size;
    }
    // Squared jerk.
    const int j = BlockIndex(BlockKind::kJerk, axis);
    const int q = BlockIndex(BlockKind::kJerkSquared, axis);
    const std::vector<BasisWindow> wj = Windows(layouts[j], layouts[q]);
    const std::vector<BasisWindow> wq = Windows(layouts[q], layouts[q]);
    for (size_t w = 0; w < wq.size(); ++w) {
      const double sj = Dot(wj[w], z, off(j));
      r[row] = sj * sj - Dot(wq[w], z, off(q));
      Emit(jac, row, wj[w], off(j), 2.0 * sj);
      Emit(jac, row, wq[w], off(q), -1.0);
      ++row;
    }
  }

  for (int m = 0; m < num_obstacles(); ++m) {
    for (int axis = 0; axis < 2; ++axis) {
      const int rf = BlockIndex(BlockKind::kRefit, axis, m);
      const Sites sites = GrevilleOf(layouts[rf]);
      const std::vector<BasisWindow> w = Windows(layouts[rf], layouts[rf]);
      const Spline& pred = obstacle_splines_[2 * m + axis];
      for (size_t k = 0; k < w.size(); ++k) {
        r[row] = Dot(w[k], z, off(rf)) - pred(sites.tau[k], sites.side[k]);
        Emit(jac, row, w[k], off(rf), 1.0);
        ++row;
      }
    }
    for (int axis = 0; axis < 2; ++axis) {
      const int p = BlockIndex(BlockKind::kPosition, axis);
      const int rf = BlockIndex(BlockKind::kRefit, axis, m);
      const int d = BlockIndex(BlockKind::kDifference, axis, m);
      const std::vector<BasisWindow> w =
          Windows(layouts[d], layouts[d]);
      for (size_t k = 0; k < w.size(); ++k) {
        r[row] = Dot(w[k], z, off(p)) - Dot(w[k], z, off(rf)) -
                 Dot(w[k], z, off(d));
        Emit(jac, row, w[k], off(p), 1.0);
        Emit(jac, row, w[k], off(rf), -1.0);
        Emit(jac, row, w[k], off(d), -1.0);
        ++row;
      }
    }
    for (int axis = 0; axis < 2; ++axis) {
      const int d = BlockIndex(BlockKind::kDifference, axis, m);
      const int sq = BlockIndex(BlockKind::kDifferenceSquared, axis, m);
      const std::vector<BasisWindow> wd = Windows(layouts[d], layouts[sq]);
      const std::vector<BasisWindow> ws = Windows(layouts[sq], layouts[sq]);
      for (size_t k = 0; k < ws.size(); ++k) {
        const double v = Dot(wd[k], z, off(d));
        r[row] = v * v - Dot(ws[k], z, off(sq));
        Emit(jac, row, wd[k], off(d), 2.0 * v);
        Emit(jac, row, ws[k], off(sq), -1.0);
        ++row;
      }
    }
    const double ax = scenario_.ego_diameter_x + obstacles_[m].diameter_x;
    const double ay = scenario_.ego_diameter_y + obstacles_[m].diameter_y;
    const int sx = BlockIndex(BlockKind::kDifferenceSquared, 0, m);
    const int sy = BlockIndex(BlockKind::kDifferenceSquared, 1, m);
    const int e = BlockIndex(BlockKind::kEllipse, 0, m);
    const std::vector<BasisWindow> wx = Windows(layouts[sx], layouts[e]);
    const std::vector<BasisWindow> wy = Windows(layouts[sy], layouts[e]);
    const std::vector<BasisWindow> we = Windows(layouts[e], layouts[e]);
    for (size_t k = 0; k < we.size(); ++k) {
      r[row] = Dot(wx[k], z, off(sx)) / (ax * ax) +
               Dot(wy[k], z, off(sy)) / (ay * ay) - Dot(we[k], z, off(e)) -
               0.25;
      Emit(jac, row, wx[k], off(sx), 1.0 / (ax * ax));
      Emit(jac, row, wy[k], off(sy), 1.0 / (ay * ay));
      Emit(jac, row, we[k], off(e), -1.0);
      ++row;
    }
  }

  {
    const int vx = BlockIndex(BlockKind::kVelocity, 0);
    const int vy = BlockIndex(BlockKind::kVelocity, 1);
    const int ub = BlockIndex(BlockKind::kHeadingUpper);
    const int lb = BlockIndex(BlockKind::kHeadingLower);
    const std::vector<BasisWindow> wx = Windows(layouts[vx], layouts[ub]);
    const std::vector<BasisWindow> wy = Windows(layouts[vy], layouts[ub]);
    const std::vector<BasisWindow> wh = Windows(layouts[ub], layouts[ub]);
    const double f = heading_factor_;
    for (int sign : {-1, 1}) {
      const int h = sign < 0 ? ub : lb;
      for (size_t k = 0; k < wh.size(); ++k) {
        r[row] = f * Dot(wx[k], z, off(vx)) + sign * Dot(wy[k], z, off(vy)) -
                 Dot(wh[k], z, off(h));
        Emit(jac, row, wx[k], off(vx), f);
        Emit(jac, row, wy[k], off(vy), sign);
        Emit(jac, row, wh[k], off(h), -1.0);
        ++row;
      }
    }
  }

  // Domain end. The interval columns come from finite differences.
  const double end = std::accumulate(intervals.begin(), intervals.end(), 0.0);
  r[row] = z[end_variable()] - end;
  if (jac) jac->emplace_back(row, end_variable(), 1.0);
  ++row;

  for (int axis = 0; axis < 2; ++axis) {
    const AxisState s0 = NormalizedState(static_cast<Axis>(axis));
    const double target[3] = {s0.position, s0.velocity, s0.acceleration};
    for (int k = 0; k < 3; ++k) {
      const int b = axis * kAxisKinds + k;
      const BasisWindow w = EvalBasisWindow(layouts[b], 0.0);
      r[row] = Dot(w, z, off(b)) - target[k];
      Emit(jac, row, w, off(b), 1.0);
      ++row;
    }
  }

  BreakpointPlan p = plan_;
  p.intervals = intervals;
  const double vt = scenario_.target_velocity * scenario_.horizon;
  for (int axis = 0; axis < 2; ++axis) {
    const std::vector<double> bp = p.AxisBreakpoints(static_cast<Axis>(axis));
    for (int idx : TerminalIndices(static_cast<Axis>(axis))) {
      const double tau = bp[idx];
      const int first_kind = axis == 0 ? 1 : 0;
      for (int k = first_kind; k < 3; ++k) {
        const int b = axis * kAxisKinds + k;
        const BasisWindow w = EvalBasisWindow(layouts[b], tau);
        r[row] = Dot(w, z, off(b)) - (axis == 0 && k == 1 ? vt : 0.0);
        Emit(jac, row, w, off(b), 1.0);
        ++row;
      }
    }
  }

  // Objective.
  const double t5 = std::pow(scenario_.horizon, 5);
  double objective = 0.0;
  if (gradient) *gradient = Eigen::VectorXd::Zero(num_variables_);
  for (int axis = 0; axis < 2; ++axis) {
    const std::vector<double> bp = p.AxisBreakpoints(static_cast<Axis>(axis));
    const double wt = axis == 0 ? scenario_.weights.time_x
                                : scenario_.weights.time_y;
    const double wj = (axis == 0 ? scenario_.weights.jerk_x
                                 : scenario_.weights.jerk_y) /
                      t5;
    for (int idx : TerminalIndices(static_cast<Axis>(axis))) {
      objective += wt * bp[idx];
    }
    const int q = BlockIndex(BlockKind::kJerkSquared, axis);
    const Eigen::VectorXd weights = IntegralWeights(layouts[q]);
    objective += wj * weights.dot(z.segment(off(q), blocks_[q].size));
    if (gradient) gradient->segment(off(q), blocks_[q].size) = wj * weights;
  }
  return objective;
}

NlpEvaluation TrajectoryProblem::Evaluate(const Eigen::VectorXd& z,
                                          bool derivatives) const {
  if (z.size() != num_variables_) {
    throw std::invalid_argument("decision vector has the wrong dimension");
  }
  NlpEvaluation e;
  try {
    if (!derivatives) {
      e.objective = Assemble(z, e.residuals, nullptr, nullptr);
      return e;
    }
    Triplets triplets;
    e.objective = Assemble(z, e.residuals, &triplets, &e.gradient);

    // Interval columns by extrapolated differences. Frozen intervals are
    // constants of the problem.
    const double end = std::accumulate(z.data() + interval_offset_,
                                       z.data() + interval_offset_ +
                                           num_intervals_,
                                       0.0);
    std::vector<int> columns;
    std::vector<double> steps;
    for (int g = 0; g < num_intervals_; ++g) {
      if (plan_.frozen[g]) continue;
      const double h = kIntervalStep * z[interval_variable(g)];
      columns.push_back(interval_variable(g));
      // One-sided where a forward step would leave the unit domain.
      steps.push_back(end + h > 1.0 ? -h : h);
    }
    const kernels::VectorFunction f = [this](const Eigen::VectorXd& x) {
      Eigen::VectorXd res;
      const double obj = Assemble(x, res, nullptr, nullptr);
      Eigen::VectorXd out(res.size() + 1);
      out << obj, res;
      return out;
    };
    const Eigen::MatrixXd cols =
        kernels::ExtrapolatedDifferenceColumns(f, z, columns, steps);
    for (size_t g = 0; g < columns.size(); ++g) {
      e.gradient[columns[g]] = cols(0, g);
      for (Eigen::Index i = 1; i < cols.rows(); ++i) {
        triplets.emplace_back(static_cast<int>(i - 1), columns[g], cols(i, g));
      }
    }
    e.jacobian.resize(num_constraints_, num_variables_);
    e.jacobian.setFromTriplets(triplets.begin(), triplets.end());
    e.jacobian.makeCompressed();
  } catch (const std::invalid_argument& err) {
    throw EvaluationError(err.what());
  } catch (const std::out_of_range& err) {
    throw EvaluationError(err.what());
  }
  return e;
}

std::optional<DependentPartition> TrajectoryProblem::partition() const {
  DependentPartition p;
  for (size_t b = 0; b < blocks_.size(); ++b) {
    if (defining_rows_[b] < 0) continue;
    for (int i = 0; i < blocks_[b].size; ++i) {
      p.variables.push_back(blocks_[b].offset + i);
      p.constraints.push_back(defining_rows_[b] + i);
    }
  }
  p.variables.push_back(end_variable());
  p.constraints.push_back(end_row_);
  return p;
}

double TrajectoryProblem::MaxViolation(const Eigen::VectorXd& z) const {
  const NlpEvaluation e = Evaluate(z, false);
  return std::max(e.residuals.lpNorm<Eigen::Infinity>(),
                  MaxBoundViolation(*this, z));
}

double TrajectoryProblem::Objective(const Eigen::VectorXd& z) const {
  return Evaluate(z, false).objective;
}

}  // namespace splinehorizon
