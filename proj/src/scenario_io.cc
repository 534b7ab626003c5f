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

#include "splinehorizon/scenario_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace splinehorizon {
namespace {

using nlohmann::json;

struct Unit {
  const char* name;
  const char* dimension;
  double factor;
};

constexpr Unit kUnits[] = {
    {"m", "length", 1.0},
    {"km", "length", 1000.0},
    {"m/s", "velocity", 1.0},
    {"km/h", "velocity", 1.0 / 3.6},
    {"m/s^2", "acceleration", 1.0},
    {"rad", "angle", 1.0},
    {"deg", "angle", M_PI / 180.0},
    {"s", "time", 1.0},
    {"1/m", "curvature", 1.0},
};

std::optional<double> ParseNumber(std::string_view text) {
  const size_t slash = text.find('/');
  if (slash != std::string_view::npos) {
    const std::optional<double> num = ParseNumber(text.substr(0, slash));
    const std::optional<double> den = ParseNumber(text.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
  }
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

// Reads the keys of one JSON object and rejects the ones never asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(path) {
    if (!node_.is_object()) Fail(path_, "expected an object");
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool Has(const std::string& key) const { return node_.contains(key); }

  const json* Find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& Require(const std::string& key) {
    const json* v = Find(key);
    if (v == nullptr) Fail(Path(key), "missing");
    return *v;
  }

  // A physical quantity; `dimension` empty for pure numbers.
  double Quantity(const std::string& key, const std::string& dimension,
                  std::optional<double> fallback = std::nullopt) {
    const json* v = Find(key);
    if (v == nullptr) {
      if (!fallback) Fail(Path(key), "missing");
      return *fallback;
    }
    if (v->is_number()) return v->get<double>();
    if (v->is_string() && !dimension.empty()) {
      try {
        return ParseQuantity(v->get<std::string>(), dimension);
      } catch (const ScenarioError& e) {
        Fail(Path(key), e.what());
      }
    }
    Fail(Path(key), dimension.empty()
                        ? "expected a number"
                        : "expected a number or a \"<value> <unit>\" string");
  }

  double Number(const std::string& key, double fallback) {
    return Quantity(key, "", fallback);
  }

  int Integer(const std::string& key, int fallback) {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) Fail(Path(key), "expected an integer");
    return v->get<int>();
  }

  std::string String(const std::string& key, const std::string& fallback) {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) Fail(Path(key), "expected a string");
    return v->get<std::string>();
  }

  void Finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (seen_.count(key) == 0) Fail(Path(key), "unknown field");
    }
  }

  [[noreturn]] static void Fail(const std::string& path,
                                const std::string& message) {
    throw ScenarioError(path + ": " + message);
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

AxisState ReadAxis(Section& parent, const std::string& key) {
  const json* node = parent.Find(key);
  if (node == nullptr) return {};
  Section s(*node, parent.Path(key));
  AxisState a;
  a.position = s.Quantity("position", "length", 0.0);
  a.velocity = s.Quantity("velocity", "velocity", 0.0);
  a.acceleration = s.Quantity("acceleration", "acceleration", 0.0);
  s.Finish();
  return a;
}

// Either explicit diameters or the vehicle dimensions with a heading
// allowance.
EllipseDiameters ReadDiameters(Section& s) {
  if (s.Has("ellipse")) {
    if (s.Has("diameter_x") || s.Has("diameter_y")) {
      Section::Fail(s.Path("ellipse"),
                    "give either ellipse or diameter_x and diameter_y");
    }
    Section e(s.Require("ellipse"), s.Path("ellipse"));
    const double length = e.Quantity("length", "length");
    const double width = e.Quantity("width", "length");
    const double heading = e.Quantity("heading_allowance", "angle");
    e.Finish();
    return EllipseAround(length, width, heading);
  }
  return {s.Quantity("diameter_x", "length"),
          s.Quantity("diameter_y", "length")};
}

json AxisJson(const AxisState& a) {
  return {{"position", a.position},
          {"velocity", a.velocity},
          {"acceleration", a.acceleration}};
}

std::string CsvQuote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double ParseQuantity(const std::string& text, const std::string& dimension) {
  const size_t first = text.find_first_not_of(' ');
  const size_t space = text.find(' ', first);
  if (first == std::string::npos || space == std::string::npos) {
    throw ScenarioError("\"" + text + "\" needs a value and a unit");
  }
  const std::optional<double> value =
      ParseNumber(std::string_view(text).substr(first, space - first));
  if (!value) throw ScenarioError("\"" + text + "\" has no numeric value");
  const size_t unit_begin = text.find_first_not_of(' ', space);
  const size_t unit_end = text.find_last_not_of(' ');
  const std::string unit =
      unit_begin == std::string::npos
          ? ""
          : text.substr(unit_begin, unit_end - unit_begin + 1);
  for (const Unit& u : kUnits) {
    if (unit != u.name) continue;
    if (dimension != u.dimension) {
      throw ScenarioError("unit " + unit + " measures " + u.dimension +
                          ", expected " + dimension);
    }
    return *value * u.factor;
  }
  throw ScenarioError("unknown unit \"" + unit + "\"");
}

Scenario ParseScenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed JSON: ") + e.what());
  }
  Section root(doc, "");
  const json& version = root.Require("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    Section::Fail("schema_version", "unsupported version " + version.dump() +
                                        ", expected " +
                                        std::to_string(kSchemaVersion));
  }
  Scenario s;
  s.name = root.String("name", "");

  {
    Section ego(root.Require("ego"), "ego");
    s.ego_x = ReadAxis(ego, "x");
    s.ego_y = ReadAxis(ego, "y");
    const EllipseDiameters d = ReadDiameters(ego);
    s.ego_diameter_x = d.x;
    s.ego_diameter_y = d.y;
    ego.Finish();
  }
  if (const json* node = root.Find("road")) {
    Section road(*node, "road");
    s.curvature_max =
        road.Quantity("curvature_max", "curvature", s.curvature_max);
    s.y_max = road.Quantity("y_max", "length", s.y_max);
    s.lane_width = road.Quantity("lane_width", "length", s.lane_width);
    road.Finish();
  }
  {
    Section targets(root.Require("targets"), "targets");
    s.target_velocity = targets.Quantity("velocity", "velocity");
    try {
      s.ordering = ParseOrdering(targets.String("ordering", "lon"));
    } catch (const ScenarioError& e) {
      Section::Fail("targets.ordering", e.what());
    }
    s.guess_time_lon =
        targets.Quantity("guess_time_lon", "time", s.guess_time_lon);
    s.guess_time_lat =
        targets.Quantity("guess_time_lat", "time", s.guess_time_lat);
    targets.Finish();
  }
  if (const json* node = root.Find("obstacles")) {
    if (!node->is_array()) Section::Fail("obstacles", "expected an array");
    for (size_t m = 0; m < node->size(); ++m) {
      Section o((*node)[m], "obstacles[" + std::to_string(m) + "]");
      Obstacle obstacle;
      obstacle.id = o.String("id", std::to_string(m + 1));
      obstacle.x = o.Quantity("x", "length");
      obstacle.y = o.Quantity("y", "length");
      obstacle.velocity_x = o.Quantity("velocity_x", "velocity");
      obstacle.velocity_y = o.Quantity("velocity_y", "velocity", 0.0);
      const EllipseDiameters d = ReadDiameters(o);
      obstacle.diameter_x = d.x;
      obstacle.diameter_y = d.y;
      o.Finish();
      s.obstacles.push_back(obstacle);
    }
  }
  {
    Section p(root.Require("planner"), "planner");
    s.nu_x = p.Integer("nu_x", s.nu_x);
    s.nu_y = p.Integer("nu_y", s.nu_y);
    s.min_interval = p.Number("min_interval", s.min_interval);
    if (const json* node = p.Find("weights")) {
      Section w(*node, "planner.weights");
      s.weights.time_x = w.Number("time_x", s.weights.time_x);
      s.weights.time_y = w.Number("time_y", s.weights.time_y);
      s.weights.jerk_x = w.Number("jerk_x", s.weights.jerk_x);
      s.weights.jerk_y = w.Number("jerk_y", s.weights.jerk_y);
      w.Finish();
    }
    s.time_step = p.Quantity("time_step", "time", s.time_step);
    s.horizon = p.Quantity("horizon", "time", s.horizon);
    s.prediction_length =
        p.Quantity("prediction_length", "time", s.prediction_length);
    s.velocity_max = p.Quantity("velocity_max", "velocity");
    s.accel_max_x = p.Quantity("accel_max_x", "acceleration");
    s.accel_max_y = p.Quantity("accel_max_y", "acceleration");
    s.heading_max = p.Quantity("heading_max", "angle");
    p.Finish();
  }
  if (const json* node = root.Find("solver")) {
    Section v(*node, "solver");
    s.solver.kkt_tolerance = v.Number("kkt_tolerance", s.solver.kkt_tolerance);
    s.solver.feasibility_tolerance =
        v.Number("feasibility_tolerance", s.solver.feasibility_tolerance);
    s.solver.max_iterations =
        v.Integer("max_iterations", s.solver.max_iterations);
    v.Finish();
  }
  root.Finish();
  Validate(s);
  return s;
}

Scenario LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseScenario(buffer.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

std::string ScenarioToJson(const Scenario& s) {
  json obstacles = json::array();
  for (const Obstacle& o : s.obstacles) {
    obstacles.push_back({{"id", o.id},
                         {"x", o.x},
                         {"y", o.y},
                         {"velocity_x", o.velocity_x},
                         {"velocity_y", o.velocity_y},
                         {"diameter_x", o.diameter_x},
                         {"diameter_y", o.diameter_y}});
  }
  const json doc = {
      {"schema_version", kSchemaVersion},
      {"name", s.name},
      {"ego",
       {{"x", AxisJson(s.ego_x)},
        {"y", AxisJson(s.ego_y)},
        {"diameter_x", s.ego_diameter_x},
        {"diameter_y", s.ego_diameter_y}}},
      {"road",
       {{"curvature_max", s.curvature_max},
        {"y_max", s.y_max},
        {"lane_width", s.lane_width}}},
      {"targets",
       {{"velocity", s.target_velocity},
        {"ordering", ToString(s.ordering)},
        {"guess_time_lon", s.guess_time_lon},
        {"guess_time_lat", s.guess_time_lat}}},
      {"obstacles", obstacles},
      {"planner",
       {{"nu_x", s.nu_x},
        {"nu_y", s.nu_y},
        {"min_interval", s.min_interval},
        {"weights",
         {{"time_x", s.weights.time_x},
          {"time_y", s.weights.time_y},
          {"jerk_x", s.weights.jerk_x},
          {"jerk_y", s.weights.jerk_y}}},
        {"time_step", s.time_step},
        {"horizon", s.horizon},
        {"prediction_length", s.prediction_length},
        {"velocity_max", s.velocity_max},
        {"accel_max_x", s.accel_max_x},
        {"accel_max_y", s.accel_max_y},
        {"heading_max", s.heading_max}}},
      {"solver",
       {{"kkt_tolerance", s.solver.kkt_tolerance},
        {"feasibility_tolerance", s.solver.feasibility_tolerance},
        {"max_iterations", s.solver.max_iterations}}}};
  return doc.dump(2) + "\n";
}

void WriteTrajectoryCsv(std::ostream& out, const PlanSnapshot& plan,
                        int samples) {
  out << "tau,t,p_x,v_x,a_x,j_x,p_y,v_y,a_y,j_y\n";
  if (plan.ego.empty() || samples < 2) return;
  out << std::setprecision(12);
  for (int i = 0; i < samples; ++i) {
    const double tau = plan.end() * i / (samples - 1);
    const double t = plan.time + tau * plan.horizon;
    out << tau << ',' << t;
    for (Axis axis : {Axis::kX, Axis::kY}) {
      for (int d = 0; d < 4; ++d) out << ',' << plan.Evaluate(axis, d, t);
    }
    out << '\n';
  }
}

void WriteBreakpointsCsv(std::ostream& out, const PlanSnapshot& plan) {
  out << "index,tau,t,axis,frozen\n" << std::setprecision(12);
  const std::vector<double> v = plan.plan.Values();
  for (size_t l = 0; l < v.size(); ++l) {
    std::string axis = "start";
    if (l + 1 == v.size()) {
      axis = "end";
    } else if (l > 0) {
      axis = plan.plan.tags[l - 1] == Axis::kX ? "x" : "y";
    }
    const bool frozen = l > 0 && plan.plan.frozen[l - 1];
    out << l << ',' << v[l] << ',' << plan.time + v[l] * plan.horizon << ','
        << axis << ',' << frozen << '\n';
  }
}

void WriteSimulationCsv(std::ostream& out, const SimulationLog& log) {
  out << "step,time,p_x,v_x,a_x,p_y,v_y,a_y,objective,status,accepted,"
         "active,mode,lon_reached,lat_reached,iterations,solve_seconds,"
         "breakpoints,tags,frozen\n"
      << std::setprecision(12);
  for (const StepRecord& r : log.steps) {
    out << r.step << ',' << r.time << ',' << r.state.x.position << ','
        << r.state.x.velocity << ',' << r.state.x.acceleration << ','
        << r.state.y.position << ',' << r.state.y.velocity << ','
        << r.state.y.acceleration << ',' << r.outcome.objective << ','
        << CsvQuote(r.outcome.status) << ',' << r.outcome.accepted << ','
        << r.outcome.active << ',' << ToString(r.mode) << ','
        << r.lon_reached << ',' << r.lat_reached << ','
        << r.outcome.iterations << ',' << r.outcome.solve_seconds << ',';
    std::string breakpoints;
    for (double b : r.breakpoints) {
      std::ostringstream os;
      os << std::setprecision(12) << b;
      breakpoints += (breakpoints.empty() ? "" : " ") + os.str();
    }
    std::string tags;
    for (Axis a : r.tags) tags += a == Axis::kX ? 'x' : 'y';
    std::string frozen;
    for (bool f : r.frozen) frozen += f ? '1' : '0';
    out << breakpoints << ',' << tags << ',' << frozen << '\n';
  }
}

void WriteObjectiveTable(std::ostream& out, const std::vector<SweepRun>& runs) {
  out << "time";
  size_t rows = 0;
  for (const SweepRun& r : runs) {
    out << ',' << r.label;
    rows = std::max(rows, r.log.steps.size());
  }
  out << '\n' << std::setprecision(12);
  for (size_t k = 0; k < rows; ++k) {
    bool first = true;
    for (const SweepRun& r : runs) {
      if (first && k < r.log.steps.size()) {
        out << r.log.steps[k].time;
        first = false;
      }
    }
    for (const SweepRun& r : runs) {
      out << ',';
      if (k < r.log.steps.size()) out << r.log.steps[k].outcome.objective;
    }
    out << '\n';
  }
}

void WriteTimingTable(std::ostream& out, const std::vector<SweepRun>& runs) {
  out << "run,nu_y,obstacles,solved_steps,median_s,mean_s,max_s\n"
      << std::setprecision(6);
  for (const SweepRun& r : runs) {
    std::vector<double> t;
    for (const StepRecord& s : r.log.steps) {
      if (s.outcome.solved) t.push_back(s.outcome.solve_seconds);
    }
    double mean = 0.0;
    double max = 0.0;
    for (double v : t) {
      mean += v / t.size();
      max = std::max(max, v);
    }
    out << r.label << ',' << r.nu_y << ',' << r.obstacles << ',' << t.size()
        << ',' << Median(t) << ',' << mean << ',' << max << '\n';
  }
}

}  // namespace splinehorizon
