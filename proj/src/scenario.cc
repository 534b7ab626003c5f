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

#include "splinehorizon/scenario.h"

#include <cmath>
#include <sstream>

namespace splinehorizon {
namespace {

void Require(bool condition, const std::string& field,
             const std::string& message) {
  if (!condition) throw ScenarioError(field + ": " + message);
}

void RequirePositive(double value, const std::string& field) {
  Require(std::isfinite(value) && value > 0.0, field, "must be positive");
}

void RequireFinite(double value, const std::string& field) {
  Require(std::isfinite(value), field, "must be finite");
}

}  // namespace

std::string ToString(Ordering ordering) {
  return ordering == Ordering::kLon ? "lon" : "lat";
}

Ordering ParseOrdering(const std::string& text) {
  if (text == "lon") return Ordering::kLon;
  if (text == "lat") return Ordering::kLat;
  throw ScenarioError("ordering must be \"lon\" or \"lat\", got \"" + text +
                      "\"");
}

void Validate(const Scenario& s) {
  RequireFinite(s.ego_x.position, "ego.x.position");
  RequireFinite(s.ego_x.velocity, "ego.x.velocity");
  RequireFinite(s.ego_x.acceleration, "ego.x.acceleration");
  RequireFinite(s.ego_y.position, "ego.y.position");
  RequireFinite(s.ego_y.velocity, "ego.y.velocity");
  RequireFinite(s.ego_y.acceleration, "ego.y.acceleration");
  RequirePositive(s.ego_diameter_x, "ego.diameter_x");
  RequirePositive(s.ego_diameter_y, "ego.diameter_y");
  RequirePositive(s.curvature_max, "road.curvature_max");
  RequirePositive(s.y_max, "road.y_max");
  RequirePositive(s.lane_width, "road.lane_width");
  Require(s.curvature_max * s.y_max < 1.0, "road.curvature_max",
          "curvature_max * y_max must be below 1");
  RequirePositive(s.target_velocity, "targets.velocity");
  RequirePositive(s.horizon, "planner.horizon");
  RequirePositive(s.guess_time_lon, "targets.guess_time_lon");
  RequirePositive(s.guess_time_lat, "targets.guess_time_lat");
  Require(s.guess_time_lon <= s.horizon, "targets.guess_time_lon",
          "must not exceed the horizon");
  Require(s.guess_time_lat <= s.horizon, "targets.guess_time_lat",
          "must not exceed the horizon");
  Require(s.nu_x >= 0, "planner.nu_x", "must be non-negative");
  Require(s.nu_y >= 0, "planner.nu_y", "must be non-negative");
  Require(s.min_interval > 0.0 && s.min_interval < 1.0, "planner.min_interval",
          "must lie in (0, 1)");
  Require(s.min_interval * (s.nu_x + s.nu_y + 1) <= 1.0, "planner.min_interval",
          "too large for the number of breakpoints");
  Require(s.weights.time_x >= 0.0 && s.weights.time_y >= 0.0 &&
              s.weights.jerk_x >= 0.0 && s.weights.jerk_y >= 0.0,
          "planner.weights", "must be non-negative");
  RequirePositive(s.time_step, "planner.time_step");
  Require(s.time_step < s.horizon, "planner.time_step",
          "must be shorter than the horizon");
  Require(s.prediction_length >= s.horizon, "planner.prediction_length",
          "must cover the horizon");
  RequirePositive(s.velocity_max, "planner.velocity_max");
  RequirePositive(s.accel_max_x, "planner.accel_max_x");
  RequirePositive(s.accel_max_y, "planner.accel_max_y");
  RequirePositive(s.heading_max, "planner.heading_max");
  Require(s.heading_max < M_PI / 2, "planner.heading_max",
          "must be below 90 degrees");
  Require(s.target_velocity <= s.velocity_max, "targets.velocity",
          "exceeds planner.velocity_max");
  if (s.accel_max_y <= s.curvature_max * s.velocity_max * s.velocity_max) {
    std::ostringstream os;
    os << "lateral acceleration box is empty: accel_max_y = " << s.accel_max_y
       << " does not exceed curvature_max * velocity_max^2 = "
       << s.curvature_max * s.velocity_max * s.velocity_max;
    throw ScenarioError("planner.accel_max_y: " + os.str());
  }
  RequirePositive(s.solver.kkt_tolerance, "solver.kkt_tolerance");
  RequirePositive(s.solver.feasibility_tolerance,
                  "solver.feasibility_tolerance");
  Require(s.solver.max_iterations >= 1, "solver.max_iterations",
          "must be at least 1");
  for (size_t m = 0; m < s.obstacles.size(); ++m) {
    const Obstacle& o = s.obstacles[m];
    const std::string base = "obstacles[" + std::to_string(m) + "]";
    RequireFinite(o.x, base + ".x");
    RequireFinite(o.y, base + ".y");
    RequireFinite(o.velocity_x, base + ".velocity_x");
    RequireFinite(o.velocity_y, base + ".velocity_y");
    RequirePositive(o.diameter_x, base + ".diameter_x");
    RequirePositive(o.diameter_y, base + ".diameter_y");
  }
}

EllipseDiameters EllipseAround(double length, double width, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {std::sqrt(2.0) * (length * c + width * s),
          std::sqrt(2.0) * (length * s + width * c)};
}

double HeadingFactor(const Scenario& s) {
  return (1.0 - s.curvature_max * s.y_max) * std::tan(s.heading_max);
}

double LateralAccelerationLimit(const Scenario& s) {
  return s.accel_max_y - s.curvature_max * s.velocity_max * s.velocity_max;
}

Spline PredictObstacle(const Obstacle& obstacle, Axis axis, double horizon) {
  const double p = axis == Axis::kX ? obstacle.x : obstacle.y;
  const double v = axis == Axis::kX ? obstacle.velocity_x : obstacle.velocity_y;
  const KnotLayout layout = KnotLayout::Clamped(6);
  // Linear precision: coefficients at the Greville sites reproduce lines.
  const std::vector<double> xi = layout.GrevilleSites();
  Eigen::VectorXd c(layout.dimension());
  for (int i = 0; i < layout.dimension(); ++i) c[i] = p + v * horizon * xi[i];
  return Spline(layout, c);
}

Obstacle Propagate(const Obstacle& obstacle, double dt) {
  Obstacle o = obstacle;
  o.x += o.velocity_x * dt;
  o.y += o.velocity_y * dt;
  return o;
}

Scenario HighwayLaneChange(int obstacle_count) {
  if (obstacle_count < 0 || obstacle_count > 5) {
    throw ScenarioError("obstacle_count must lie in [0, 5]");
  }
  constexpr double kKmh = 1.0 / 3.6;
  constexpr double kDeg = M_PI / 180.0;
  constexpr double kLength = 4.8;
  constexpr double kWidth = 1.9;

  Scenario s;
  s.name = "highway_lane_change";
  s.ego_x = {0.0, 50.0 * kKmh, 0.0};
  s.ego_y = {3.5, 0.0, 0.0};
  const EllipseDiameters ego = EllipseAround(kLength, kWidth, 10.0 * kDeg);
  s.ego_diameter_x = ego.x;
  s.ego_diameter_y = ego.y;
  s.target_velocity = 70.0 * kKmh;
  s.velocity_max = 80.0 * kKmh;
  s.accel_max_x = 3.0;
  s.accel_max_y = 4.0;
  s.heading_max = 10.0 * kDeg;

  const EllipseDiameters other = EllipseAround(kLength, kWidth, 13.0 * kDeg);
  const struct {
    double x, y, v;
  } kObstacles[] = {{-5.0, 0.0, 50.0},
                    {-40.0, 0.0, 70.0},
                    {-20.0, 7.0, 70.0},
                    {-25.0, -3.5, 50.0},
                    {-30.0, 3.5, 50.0}};
  for (int m = 0; m < obstacle_count; ++m) {
    Obstacle o;
    o.id = std::to_string(m + 1);
    o.x = kObstacles[m].x;
    o.y = kObstacles[m].y;
    o.velocity_x = kObstacles[m].v * kKmh;
    o.diameter_x = other.x;
    o.diameter_y = other.y;
    s.obstacles.push_back(o);
  }
  return s;
}

}  // namespace splinehorizon
