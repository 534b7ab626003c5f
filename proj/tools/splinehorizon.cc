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

// Command line front end: plan, simulate, sweep, validate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splinehorizon/horizon_planner.h"
#include "splinehorizon/scenario.h"
#include "splinehorizon/scenario_io.h"
#include "splinehorizon/validation.h"

namespace fs = std::filesystem;
using namespace splinehorizon;

namespace {

constexpr int kTrajectorySamples = 501;

struct Common {
  std::string scenario;
  std::string out = ".";
  std::optional<int> ny;
  bool verbose = false;
};

Scenario Load(const Common& c) {
  Scenario s = c.scenario.empty() ? HighwayLaneChange() : LoadScenario(c.scenario);
  if (c.ny) {
    s.nu_y = *c.ny;
    Validate(s);
  }
  return s;
}

std::ofstream Open(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Leaves a marker next to partial artifacts.
void Flag(const fs::path& dir, const std::string& reason) {
  Open(dir / "FAILED") << reason << '\n';
  std::cerr << "error: " << reason << '\n';
}

PlannerOptions Options(const Common& c) {
  PlannerOptions o;
  if (c.verbose) o.solver_log = &std::clog;
  return o;
}

int Plan(const Common& c) {
  const Scenario s = Load(c);
  PlannerState state = InitialGuess(s);
  const StepOutcome outcome = PlanStep(state, Options(c));
  const PlanSnapshot plan = Snapshot(state);
  const fs::path dir(c.out);
  {
    std::ofstream out = Open(dir / "trajectory.csv");
    WriteTrajectoryCsv(out, plan, kTrajectorySamples);
  }
  {
    std::ofstream out = Open(dir / "breakpoints.csv");
    WriteBreakpointsCsv(out, plan);
  }
  std::cout << "status " << outcome.status << ", objective "
            << outcome.objective << ", " << outcome.iterations
            << " iterations, " << outcome.solve_seconds << " s\n";
  if (state.mode == PlannerMode::kOptimizing && !outcome.accepted) {
    Flag(dir, "solve did not converge: " + outcome.status);
    return 1;
  }
  return 0;
}

// Empty when the run completed; otherwise what went wrong.
std::string Failure(const SimulationLog& log) {
  for (const StepRecord& r : log.steps) {
    if (r.outcome.solved && !r.outcome.accepted) {
      return "step " + std::to_string(r.step) + ": " + r.outcome.status;
    }
  }
  return "";
}

void WriteRun(const fs::path& dir, const SimulationLog& log,
              const std::vector<int>& plan_steps) {
  {
    std::ofstream out = Open(dir / "simulation.csv");
    WriteSimulationCsv(out, log);
  }
  for (int k : plan_steps) {
    if (k < 0 || k >= static_cast<int>(log.plans.size())) continue;
    char name[32];
    std::snprintf(name, sizeof(name), "plan_%04d.csv", k);
    std::ofstream out = Open(dir / name);
    WriteTrajectoryCsv(out, log.plans[k], kTrajectorySamples);
  }
}

int Simulate(const Common& c, int steps, const std::vector<int>& plan_steps) {
  const Scenario s = Load(c);
  RunOptions options;
  options.steps = steps;
  options.planner = Options(c);
  const SimulationLog log = RunClosedLoop(s, options);
  const fs::path dir(c.out);
  WriteRun(dir, log, plan_steps);
  const StepRecord& last = log.steps.back();
  std::cout << log.steps.size() << " steps, final mode " << ToString(last.mode)
            << ", initial objective " << log.steps.front().outcome.objective
            << '\n';
  const std::string failure = Failure(log);
  if (!failure.empty()) {
    Flag(dir, failure);
    return 1;
  }
  return 0;
}

int Sweep(const Common& c, int steps, const std::vector<int>& counts) {
  const Scenario base = Load(c);
  std::vector<SweepRun> runs;
  std::vector<Scenario> scenarios;
  for (int count : counts) {
    if (count > static_cast<int>(base.obstacles.size())) {
      throw ScenarioError("scenario has only " +
                          std::to_string(base.obstacles.size()) +
                          " obstacles, asked for " + std::to_string(count));
    }
    for (int ny = 0; ny <= 2; ++ny) {
      Scenario s = base;
      s.nu_y = ny;
      s.obstacles.resize(count);
      Validate(s);
      SweepRun run;
      run.label = "ny" + std::to_string(ny) + "_obs" + std::to_string(count);
      run.nu_y = ny;
      run.obstacles = count;
      runs.push_back(std::move(run));
      scenarios.push_back(std::move(s));
    }
  }
  std::vector<std::string> errors(runs.size());
  const int n = static_cast<int>(runs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      RunOptions options;
      options.steps = steps;
      runs[i].log = RunClosedLoop(scenarios[i], options);
      errors[i] = Failure(runs[i].log);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  const fs::path dir(c.out);
  bool failed = false;
  std::vector<SweepRun> done;
  for (int i = 0; i < n; ++i) {
    if (!runs[i].log.steps.empty()) {
      WriteRun(dir / runs[i].label, runs[i].log, {});
      done.push_back(runs[i]);
    }
    if (!errors[i].empty()) {
      Flag(dir / runs[i].label, errors[i]);
      failed = true;
    }
  }
  {
    std::ofstream out = Open(dir / "objective.csv");
    WriteObjectiveTable(out, done);
  }
  std::ostringstream timing;
  WriteTimingTable(timing, done);
  Open(dir / "timing.csv") << timing.str();
  std::cout << timing.str();
  return failed ? 1 : 0;
}

int RunValidate(const Common& c, std::uint32_t seed, int layouts, int points) {
  std::vector<CheckResult> results = RunSplineSuite(seed, layouts);
  Scenario s = c.scenario.empty() ? HighwayLaneChange(2) : Load(c);
  if (c.ny) s.nu_y = *c.ny;
  const std::vector<CheckResult> model = RunModelSuite(s, seed, points);
  results.insert(results.end(), model.begin(), model.end());
  bool ok = true;
  for (const CheckResult& r : results) {
    std::printf("%s %-40s worst %.3g (tolerance %.3g, %d cases)\n",
                r.passed() ? "PASS" : "FAIL", r.name.c_str(), r.worst,
                r.tolerance, r.cases);
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-spline trajectory planning on a shrinking horizon"};
  app.require_subcommand(1);
  Common common;
  int steps = -1;
  std::vector<int> plan_steps{0};
  std::vector<int> counts{2, 4, 5};
  std::uint32_t seed = 1;
  int layouts = 100;
  int points = 10;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario,
                    "Scenario JSON file (default: built-in highway lane "
                    "change)")
        ->check(CLI::ExistingFile);
    sub->add_option("--ny", common.ny, "Interior lateral breakpoints")
        ->check(CLI::Range(0, 2));
    sub->add_flag("--verbose", common.verbose, "Solver iteration log");
  };

  CLI::App* plan = app.add_subcommand("plan", "One open-loop solve");
  add_common(plan);
  plan->add_option("--out", common.out, "Output directory");

  CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop run");
  add_common(simulate);
  simulate->add_option("--out", common.out, "Output directory");
  simulate->add_option("--steps", steps,
                       "Advances (default: until coasting)");
  simulate->add_option("--plans", plan_steps,
                       "Steps whose open-loop plan is written");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Closed loops for ny in {0, 1, 2} and several obstacle counts");
  add_common(sweep);
  sweep->add_option("--out", common.out, "Output directory");
  sweep->add_option("--steps", steps, "Advances per run");
  sweep->add_option("--obstacles", counts, "Obstacle counts")
      ->check(CLI::NonNegativeNumber);

  CLI::App* validate =
      app.add_subcommand("validate", "Randomized invariant suites");
  add_common(validate);
  validate->add_option("--seed", seed, "Random seed");
  validate->add_option("--layouts", layouts, "Random spline layouts")
      ->check(CLI::PositiveNumber);
  validate->add_option("--points", points, "Random feasible points")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return Plan(common);
    if (*simulate) return Simulate(common, steps, plan_steps);
    if (*sweep) return Sweep(common, steps, counts);
    if (*validate) return RunValidate(common, seed, layouts, points);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
