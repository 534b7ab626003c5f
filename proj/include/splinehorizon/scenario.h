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

// Scenario description in physical SI units. Positions are curvilinear
// coordinates in the target lane frame: x along the lane center, y to the
// left of it.

#ifndef SPLINEHORIZON_SCENARIO_H_
#define SPLINEHORIZON_SCENARIO_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "splinehorizon/bspline.h"

namespace splinehorizon {

enum class Axis { kX = 0, kY = 1 };

// Which part of the terminal manifold is reached first.
enum class Ordering { kLon, kLat };

std::string ToString(Ordering ordering);
Ordering ParseOrdering(const std::string& text);

struct AxisState {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;

  friend bool operator==(const AxisState&, const AxisState&) = default;
};

struct Obstacle {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double velocity_x = 0.0;
  double velocity_y = 0.0;
  double diameter_x = 0.0;
  double diameter_y = 0.0;

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct Weights {
  double time_x = 1.0;
  double time_y = 1.0;
  double jerk_x = 0.05;
  double jerk_y = 0.05;

  friend bool operator==(const Weights&, const Weights&) = default;
};

struct SolverSettings {
  double kkt_tolerance = 1e-6;
  double feasibility_tolerance = 1e-6;
  int max_iterations = 500;

  friend bool operator==(const SolverSettings&, const SolverSettings&) =
      default;
};

struct Scenario {
  std::string name;

  // Ego vehicle.
  AxisState ego_x;
  AxisState ego_y;
  double ego_diameter_x = 0.0;
  double ego_diameter_y = 0.0;

  // Road.
  double curvature_max = 1.0 / 180.0;
  double y_max = 5.25;
  double lane_width = 3.5;

  // Targets.
  double target_velocity = 0.0;
  Ordering ordering = Ordering::kLon;
  double guess_time_lon = 7.0;
  double guess_time_lat = 9.0;

  std::vector<Obstacle> obstacles;

  // Planner.
  int nu_x = 1;
  int nu_y = 1;
  double min_interval = 0.02;
  Weights weights;
  double time_step = 0.1;
  double horizon = 10.0;
  double prediction_length = 10.0;
  double velocity_max = 0.0;
  double accel_max_x = 0.0;
  double accel_max_y = 0.0;
  double heading_max = 0.0;

  SolverSettings solver;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Raised for parameter sets that cannot describe a solvable problem.
class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Throws ScenarioError naming the first offending field.
void Validate(const Scenario& scenario);

// Axis-aligned ellipse around a length x width rectangle rotated by up to
// `heading` radians: the rotated extents scaled by sqrt(2).
struct EllipseDiameters {
  double x;
  double y;
};
EllipseDiameters EllipseAround(double length, double width, double heading);

// Heading bound factor (1 - kappa_max * y_max) * tan(heading_max).
double HeadingFactor(const Scenario& scenario);

// Lateral acceleration margin left after the curvature term.
double LateralAccelerationLimit(const Scenario& scenario);

// Constant-velocity prediction over the normalized horizon, as an order-6
// spline without interior breakpoints: S(tau) = p + v * horizon * tau.
Spline PredictObstacle(const Obstacle& obstacle, Axis axis, double horizon);

// Obstacle state after `dt` seconds of constant-velocity motion.
Obstacle Propagate(const Obstacle& obstacle, double dt);

// Highway lane change to the right: the ego drives at 50 km/h one lane to the
// left of the target lane and accelerates to 70 km/h. Keeps the first
// `obstacle_count` (0..5) of the five obstacles.
Scenario HighwayLaneChange(int obstacle_count = 5);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_SCENARIO_H_
