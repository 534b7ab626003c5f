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

// The trajectory optimization problem over B-spline coefficients and
// breakpoint intervals.
//
// Time is normalized by the horizon T: tau = t / T. Velocities, accelerations
// and jerks are stored as derivatives with respect to tau, i.e. scaled by T,
// T^2 and T^3. Positions are in meters.

#ifndef SPLINEHORIZON_TRAJECTORY_PROBLEM_H_
#define SPLINEHORIZON_TRAJECTORY_PROBLEM_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splinehorizon/bspline.h"
#include "splinehorizon/nlp.h"
#include "splinehorizon/scenario.h"

namespace splinehorizon {

inline constexpr int kPositionOrder = 6;
inline constexpr int kPositionContinuity = 3;

// Common breakpoint vector 0 = zeta_0 < zeta_1 < ... < zeta_{nu+1} <= 1,
// stored as intervals. Interior breakpoint l (1-based) belongs to the axis
// tags[l - 1]. A frozen interval keeps its value and is not optimized.
struct BreakpointPlan {
  std::vector<double> intervals;
  std::vector<Axis> tags;
  std::vector<bool> frozen;

  int interior_count() const { return static_cast<int>(tags.size()); }
  int count(Axis axis) const;
  double end() const;
  // zeta_0 .. zeta_{nu+1}.
  std::vector<double> Values() const;
  // [0, interior breakpoints of `axis`, end].
  std::vector<double> AxisBreakpoints(Axis axis) const;
  bool AllFrozen() const;

  // Throws std::invalid_argument on inconsistent sizes, non-positive
  // intervals or an end beyond 1.
  void Check() const;

  friend bool operator==(const BreakpointPlan&, const BreakpointPlan&) =
      default;
};

enum class BlockKind {
  kPosition,
  kVelocity,
  kAcceleration,
  kJerk,
  kJerkSquared,
  kRefit,
  kDifference,
  kDifferenceSquared,
  kEllipse,
  kHeadingUpper,
  kHeadingLower,
};

std::string ToString(BlockKind kind);

// One spline coefficient block of the decision vector.
struct Block {
  BlockKind kind;
  int axis;      // 0 = x, 1 = y; 0 for blocks without an axis
  int obstacle;  // -1 for ego blocks
  int offset;
  int size;
};

// Contiguous group of equality rows.
struct RowGroup {
  std::string name;
  int offset;
  int size;
};

// Ego state at the current time in physical units.
struct EgoState {
  AxisState x;
  AxisState y;
};

class TrajectoryProblem : public NlpProblem {
 public:
  // `obstacles` are the obstacle states at the current time. Throws
  // ScenarioError for invalid scenarios and std::invalid_argument for an
  // inconsistent plan.
  TrajectoryProblem(const Scenario& scenario, BreakpointPlan plan,
                    const EgoState& state, std::vector<Obstacle> obstacles);

  int num_variables() const override { return num_variables_; }
  int num_constraints() const override { return num_constraints_; }
  const Eigen::VectorXd& lower_bounds() const override { return lower_; }
  const Eigen::VectorXd& upper_bounds() const override { return upper_; }
  NlpEvaluation Evaluate(const Eigen::VectorXd& z,
                         bool derivatives) const override;
  std::optional<DependentPartition> partition() const override;

  const Scenario& scenario() const { return scenario_; }
  const BreakpointPlan& plan() const { return plan_; }
  const EgoState& state() const { return state_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<RowGroup>& row_groups() const { return row_groups_; }
  int num_obstacles() const { return static_cast<int>(obstacles_.size()); }

  // Index into blocks() of a block.
  int BlockIndex(BlockKind kind, int axis = 0, int obstacle = -1) const;
  // Position of interval gamma and of the domain end in z.
  int interval_variable(int gamma) const { return interval_offset_ + gamma; }
  int end_variable() const { return interval_offset_ + num_intervals_; }
  int num_intervals() const { return num_intervals_; }

  std::vector<double> Intervals(const Eigen::VectorXd& z) const;
  // Plan with the intervals of z and the frozen flags of this problem.
  BreakpointPlan PlanOf(const Eigen::VectorXd& z) const;

  // Layouts of every block for the given intervals, in blocks() order.
  std::vector<KnotLayout> Layouts(const std::vector<double>& intervals) const;
  std::vector<Spline> Unpack(const Eigen::VectorXd& z) const;
  // Inverse of Unpack. Throws std::invalid_argument when a spline does not
  // have the block's dimension.
  Eigen::VectorXd Pack(const std::vector<Spline>& splines,
                       const std::vector<double>& intervals) const;

  // Fills every block that is determined by the position coefficients and
  // the intervals so that the defining rows hold exactly.
  Eigen::VectorXd CompleteAuxiliary(const Eigen::VectorXd& z) const;

  // max(|g(z)|_inf, bound violation).
  double MaxViolation(const Eigen::VectorXd& z) const;

  double Objective(const Eigen::VectorXd& z) const;

  // Normalized initial state (velocity x T, acceleration x T^2).
  AxisState NormalizedState(Axis axis) const;

  // Terminal breakpoint indices (into AxisBreakpoints) for an axis, index 0
  // excluded.
  std::vector<int> TerminalIndices(Axis axis) const;

 private:
  double Assemble(const Eigen::VectorXd& z, Eigen::VectorXd& residuals,
                  std::vector<Eigen::Triplet<double>>* jacobian,
                  Eigen::VectorXd* gradient) const;

  Scenario scenario_;
  BreakpointPlan plan_;
  EgoState state_;
  std::vector<Obstacle> obstacles_;
  std::vector<Spline> obstacle_splines_;  // [m * 2 + axis]
  double heading_factor_;
  std::vector<Block> blocks_;
  std::vector<RowGroup> row_groups_;
  std::vector<int> defining_rows_;  // per block, row offset of its rows (-1)
  int interval_offset_ = 0;
  int num_intervals_ = 0;
  int num_variables_ = 0;
  int num_constraints_ = 0;
  int end_row_ = 0;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_TRAJECTORY_PROBLEM_H_
