#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fsmp/planner.hpp"
#include "fsmp/roadmap.hpp"
#include "fsmp/sensor.hpp"
#include "fsmp/world.hpp"

namespace fsmp {

// Full description of one exploration run: world source, map resolution,
// sensor model, start pose, planner/roadmap parameters and budgets.
struct Scenario {
  std::string name = "scenario";

  // Either a generator ("maze" | "building") with size/seed, or a scene file.
  std::string world_gen;
  std::string world_file;
  Vec3 world_size{20.0, 20.0, 3.0};

  double resolution = 0.2;
  SensorSpec sensor;
  Pose start{Vec3(1.0, 1.0, 1.5), 0.0};

  RoadmapParams roadmap;
  UtilityParams utility;
  int n_max = 200;

  double v_max = 2.0;
  double a_max = 2.0;

  std::int64_t max_epochs = 100000;
  double max_sim_time = 1.0e9;

  std::uint64_t seed = 1;
};

Scenario parseScenario(std::istream& in);
Scenario loadScenarioFile(const std::string& path);
void writeScenario(const Scenario& sc, std::ostream& out);
std::string scenarioText(const Scenario& sc);

// Builds the ground-truth world the scenario describes (generator or file).
GroundTruthWorld buildWorld(const Scenario& sc);

// Checks parameter ranges and start-pose placement; throws on violation.
void validateScenario(const Scenario& sc);

}  // namespace fsmp
