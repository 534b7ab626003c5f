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

// Scenario files and result tables.
//
// A scenario file is a JSON document with a top-level "schema_version" and
// the sections ego, road, targets, obstacles, planner and solver. Physical
// quantities are either plain numbers in SI units or strings with a unit
// suffix, e.g. "50 km/h", "10 deg", "1/180 1/m". Unknown keys are rejected.
// Every error names the offending field path, e.g. "obstacles[1].x".

#ifndef SPLINEHORIZON_SCENARIO_IO_H_
#define SPLINEHORIZON_SCENARIO_IO_H_

#include <ostream>
#include <string>
#include <vector>

#include "splinehorizon/horizon_planner.h"
#include "splinehorizon/scenario.h"

namespace splinehorizon {

inline constexpr int kSchemaVersion = 1;

// Parses and validates. Throws ScenarioError.
Scenario ParseScenario(const std::string& json_text);
Scenario LoadScenario(const std::string& path);

// Every field written explicitly, SI units, diameters rather than vehicle
// dimensions. ParseScenario(ScenarioToJson(s)) == s.
std::string ScenarioToJson(const Scenario& scenario);

// Physical value of "<number> <unit>" in SI units. Throws ScenarioError when
// the unit is unknown or does not measure `dimension` ("length", "velocity",
// "acceleration", "angle", "time", "curvature").
double ParseQuantity(const std::string& text, const std::string& dimension);

// tau, t, p_x, v_x, a_x, j_x, p_y, v_y, a_y, j_y at `samples` uniform points
// of the plan's domain, physical units.
void WriteTrajectoryCsv(std::ostream& out, const PlanSnapshot& plan,
                        int samples);

// One line per breakpoint: index, tau, t, axis, frozen.
void WriteBreakpointsCsv(std::ostream& out, const PlanSnapshot& plan);

// One line per simulation step.
void WriteSimulationCsv(std::ostream& out, const SimulationLog& log);

struct SweepRun {
  std::string label;
  int nu_y = 0;
  int obstacles = 0;
  SimulationLog log;
};

// Objective over time, one column per run.
void WriteObjectiveTable(std::ostream& out, const std::vector<SweepRun>& runs);

// Per run: solved steps, median, mean and maximum solve time.
void WriteTimingTable(std::ostream& out, const std::vector<SweepRun>& runs);

}  // namespace splinehorizon

#endif  // SPLINEHORIZON_SCENARIO_IO_H_
