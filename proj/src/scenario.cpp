#include "fsmp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fsmp/digest.hpp"

namespace fsmp {

namespace {

constexpr const char* kMagic = "# fsmp-scenario v1";

double parseDouble(std::istringstream& ls, const std::string& key) {
  double v;
  if (!(ls >> v)) throw std::invalid_argument("scenario: missing number for key '" + key + "'");
  return v;
}

std::int64_t parseInt(std::istringstream& ls, const std::string& key) {
  std::int64_t v;
  if (!(ls >> v)) throw std::invalid_argument("scenario: missing integer for key '" + key + "'");
  return v;
}

}  // namespace

Scenario parseScenario(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw std::invalid_argument("scenario: missing header '" + std::string(kMagic) + "'");

  Scenario sc;
  sc.roadmap.candidate_radius = 0.0;  // sentinel: derive from d_max unless set
  bool explicit_radius = false;

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty()) continue;

    if (key == "name") {
      ls >> sc.name;
    } else if (key == "world_gen") {
      ls >> sc.world_gen;
    } else if (key == "world_file") {
      ls >> sc.world_file;
    } else if (key == "world_size") {
      sc.world_size.x() = parseDouble(ls, key);
      sc.world_size.y() = parseDouble(ls, key);
      sc.world_size.z() = parseDouble(ls, key);
    } else if (key == "resolution") {
      sc.resolution = parseDouble(ls, key);
    } else if (key == "hfov_deg") {
      sc.sensor.hfov_deg = parseDouble(ls, key);
    } else if (key == "vfov_deg") {
      sc.sensor.vfov_deg = parseDouble(ls, key);
    } else if (key == "min_range") {
      sc.sensor.min_range = parseDouble(ls, key);
    } else if (key == "max_range") {
      sc.sensor.max_range = parseDouble(ls, key);
    } else if (key == "rays_h") {
      sc.sensor.rays_h = static_cast<int>(parseInt(ls, key));
    } else if (key == "rays_v") {
      sc.sensor.rays_v = static_cast<int>(parseInt(ls, key));
    } else if (key == "start") {
      sc.start.position.x() = parseDouble(ls, key);
      sc.start.position.y() = parseDouble(ls, key);
      sc.start.position.z() = parseDouble(ls, key);
      sc.start.yaw = parseDouble(ls, key);
    } else if (key == "d_min") {
      sc.roadmap.d_min = parseDouble(ls, key);
    } else if (key == "d_max") {
      sc.roadmap.d_max = parseDouble(ls, key);
    } else if (key == "l_x") {
      sc.roadmap.sample_cell.x() = parseDouble(ls, key);
    } else if (key == "l_y") {
      sc.roadmap.sample_cell.y() = parseDouble(ls, key);
    } else if (key == "l_z") {
      sc.roadmap.sample_cell.z() = parseDouble(ls, key);
    } else if (key == "z_min") {
      sc.roadmap.z_min = parseDouble(ls, key);
    } else if (key == "z_max") {
      sc.roadmap.z_max = parseDouble(ls, key);
    } else if (key == "candidate_radius") {
      sc.roadmap.candidate_radius = parseDouble(ls, key);
      explicit_radius = true;
    } else if (key == "candidate_k") {
      sc.roadmap.candidate_k = static_cast<int>(parseInt(ls, key));
    } else if (key == "lambda") {
      sc.utility.lambda = parseDouble(ls, key);
    } else if (key == "i_max") {
      sc.utility.i_max = parseDouble(ls, key);
    } else if (key == "yaw_bins") {
      sc.utility.yaw_bins = static_cast<int>(parseInt(ls, key));
    } else if (key == "gain_ray_factor") {
      sc.utility.gain_ray_factor = static_cast<int>(parseInt(ls, key));
    } else if (key == "n_max") {
      sc.n_max = static_cast<int>(parseInt(ls, key));
    } else if (key == "v_max") {
      sc.v_max = parseDouble(ls, key);
    } else if (key == "a_max") {
      sc.a_max = parseDouble(ls, key);
    } else if (key == "max_epochs") {
      sc.max_epochs = parseInt(ls, key);
    } else if (key == "max_sim_time") {
      sc.max_sim_time = parseDouble(ls, key);
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(parseInt(ls, key));
    } else {
      throw std::invalid_argument("scenario: unknown key '" + key + "'");
    }
  }

  if (!explicit_radius) sc.roadmap.candidate_radius = 2.0 * sc.roadmap.d_max;
  validateScenario(sc);
  return sc;
}

Scenario loadScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return parseScenario(in);
}

void writeScenario(const Scenario& sc, std::ostream& out) {
  out << kMagic << "\n";
  out << "name " << sc.name << "\n";
  if (!sc.world_gen.empty()) {
    out << "world_gen " << sc.world_gen << "\n";
    out << "world_size " << doubleText(sc.world_size.x()) << " " << doubleText(sc.world_size.y())
        << " " << doubleText(sc.world_size.z()) << "\n";
  }
  if (!sc.world_file.empty()) out << "world_file " << sc.world_file << "\n";
  out << "resolution " << doubleText(sc.resolution) << "\n";
  out << "hfov_deg " << doubleText(sc.sensor.hfov_deg) << "\n";
  out << "vfov_deg " << doubleText(sc.sensor.vfov_deg) << "\n";
  out << "min_range " << doubleText(sc.sensor.min_range) << "\n";
  out << "max_range " << doubleText(sc.sensor.max_range) << "\n";
  out << "rays_h " << sc.sensor.rays_h << "\n";
  out << "rays_v " << sc.sensor.rays_v << "\n";
  out << "start " << doubleText(sc.start.position.x()) << " " << doubleText(sc.start.position.y())
      << " " << doubleText(sc.start.position.z()) << " " << doubleText(sc.start.yaw) << "\n";
  out << "d_min " << doubleText(sc.roadmap.d_min) << "\n";
  out << "d_max " << doubleText(sc.roadmap.d_max) << "\n";
  out << "l_x " << doubleText(sc.roadmap.sample_cell.x()) << "\n";
  out << "l_y " << doubleText(sc.roadmap.sample_cell.y()) << "\n";
  out << "l_z " << doubleText(sc.roadmap.sample_cell.z()) << "\n";
  out << "z_min " << doubleText(sc.roadmap.z_min) << "\n";
  out << "z_max " << doubleText(sc.roadmap.z_max) << "\n";
  out << "candidate_radius " << doubleText(sc.roadmap.candidate_radius) << "\n";
  out << "candidate_k " << sc.roadmap.candidate_k << "\n";
  out << "lambda " << doubleText(sc.utility.lambda) << "\n";
  out << "i_max " << doubleText(sc.utility.i_max) << "\n";
  out << "yaw_bins " << sc.utility.yaw_bins << "\n";
  out << "gain_ray_factor " << sc.utility.gain_ray_factor << "\n";
  out << "n_max " << sc.n_max << "\n";
  out << "v_max " << doubleText(sc.v_max) << "\n";
  out << "a_max " << doubleText(sc.a_max) << "\n";
  out << "max_epochs " << sc.max_epochs << "\n";
  out << "max_sim_time " << doubleText(sc.max_sim_time) << "\n";
  out << "seed " << sc.seed << "\n";
}

std::string scenarioText(const Scenario& sc) {
  std::ostringstream os;
  writeScenario(sc, os);
  return os.str();
}

GroundTruthWorld buildWorld(const Scenario& sc) {
  if (sc.world_gen == "maze") return GroundTruthWorld::generateMaze(sc.world_size, sc.resolution, sc.seed);
  if (sc.world_gen == "building") return GroundTruthWorld::generateBuilding(sc.world_size, sc.resolution, sc.seed);
  if (!sc.world_gen.empty())
    throw std::invalid_argument("scenario: unknown world generator '" + sc.world_gen + "'");
  if (sc.world_file.empty())
    throw std::invalid_argument("scenario: need world_gen or world_file");
  return readSceneFile(sc.world_file);
}

void validateScenario(const Scenario& sc) {
  if (!(sc.resolution > 0.0)) throw std::invalid_argument("scenario: resolution must be > 0");
  validateSensor(resolvedSensor(sc.sensor, sc.resolution));  // zero ray counts mean "derive"
  if (!(sc.roadmap.d_min > 0.0)) throw std::invalid_argument("scenario: d_min must be > 0");
  if (!(sc.roadmap.d_max > sc.roadmap.d_min))
    throw std::invalid_argument("scenario: d_max must exceed d_min");
  if (!(sc.roadmap.sample_cell.minCoeff() > 0.0))
    throw std::invalid_argument("scenario: sampling cell sides must be > 0");
  if (!(sc.roadmap.z_max >= sc.roadmap.z_min))
    throw std::invalid_argument("scenario: z_max must be >= z_min");
  if (sc.roadmap.candidate_k < 1) throw std::invalid_argument("scenario: candidate_k must be >= 1");
  if (sc.utility.lambda < 0.0) throw std::invalid_argument("scenario: lambda must be >= 0");
  if (sc.utility.yaw_bins < 1) throw std::invalid_argument("scenario: yaw_bins must be >= 1");
  if (sc.utility.gain_ray_factor < 1)
    throw std::invalid_argument("scenario: gain_ray_factor must be >= 1");
  if (sc.n_max < 1) throw std::invalid_argument("scenario: n_max must be >= 1");
  if (!(sc.v_max > 0.0) || !(sc.a_max > 0.0))
    throw std::invalid_argument("scenario: v_max and a_max must be > 0");
  if (sc.max_epochs < 0) throw std::invalid_argument("scenario: max_epochs must be >= 0");
  if (!(sc.max_sim_time >= 0.0)) throw std::invalid_argument("scenario: max_sim_time must be >= 0");
  if (!sc.world_gen.empty() && sc.world_gen != "maze" && sc.world_gen != "building")
    throw std::invalid_argument("scenario: unknown world generator '" + sc.world_gen + "'");
  if (sc.world_gen.empty() && sc.world_file.empty())
    throw std::invalid_argument("scenario: need world_gen or world_file");
}

}  // namespace fsmp
