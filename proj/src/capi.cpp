#include "fsmp/fsmp.h"

#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fsmp/pipeline.hpp"
#include "fsmp/scenario.hpp"
#include "fsmp/world.hpp"

namespace {

thread_local std::string g_last_error;

void setError(const std::string& msg) { g_last_error = msg; }

int fromException() {
  try {
    throw;
  } catch (const std::invalid_argument& e) {
    setError(e.what());
    return FSMP_ERR_INVALID_ARGUMENT;
  } catch (const std::ios_base::failure& e) {
    setError(e.what());
    return FSMP_ERR_IO;
  } catch (const std::exception& e) {
    setError(e.what());
    const std::string what = e.what();
    if (what.find("cannot open") != std::string::npos ||
        what.find("cannot write") != std::string::npos)
      return FSMP_ERR_IO;
    return FSMP_ERR_RUNTIME;
  } catch (...) {
    setError("unknown error");
    return FSMP_ERR_RUNTIME;
  }
}

int copyOut(const std::string& s, char* buf, size_t* len) {
  if (len == nullptr) {
    setError("length pointer is null");
    return FSMP_ERR_NULL_POINTER;
  }
  const size_t need = s.size() + 1;
  if (buf == nullptr || *len < need) {
    *len = need;
    if (buf != nullptr) setError("buffer too small");
    return buf == nullptr ? FSMP_OK : FSMP_ERR_BUFFER;
  }
  std::memcpy(buf, s.c_str(), need);
  *len = need;
  return FSMP_OK;
}

}  // namespace

struct fsmp_scenario {
  fsmp::Scenario sc;
};

struct fsmp_run_result {
  fsmp::Scenario sc;
  fsmp::RunResult r;
  bool matched = true;
  std::string detail;
};

struct fsmp_bench_result {
  fsmp::BenchReport report;
};

extern "C" {

const char* fsmp_version(void) { return "1.0.0"; }

const char* fsmp_last_error(void) { return g_last_error.c_str(); }

int fsmp_scenario_load(const char* path, fsmp_scenario_t** out) {
  if (path == nullptr || out == nullptr) {
    setError("null argument");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    auto* h = new fsmp_scenario{fsmp::loadScenarioFile(path)};
    *out = h;
    return FSMP_OK;
  } catch (...) {
    return fromException();
  }
}

int fsmp_scenario_parse(const char* text, fsmp_scenario_t** out) {
  if (text == nullptr || out == nullptr) {
    setError("null argument");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    std::istringstream ss{std::string(text)};
    auto* h = new fsmp_scenario{fsmp::parseScenario(ss)};
    *out = h;
    return FSMP_OK;
  } catch (...) {
    return fromException();
  }
}

int fsmp_scenario_set_seed(fsmp_scenario_t* sc, uint64_t seed) {
  if (sc == nullptr) {
    setError("null scenario");
    return FSMP_ERR_NULL_POINTER;
  }
  sc->sc.seed = seed;
  return FSMP_OK;
}

int fsmp_scenario_text(const fsmp_scenario_t* sc, char* buf, size_t* len) {
  if (sc == nullptr) {
    setError("null scenario");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    return copyOut(fsmp::scenarioText(sc->sc), buf, len);
  } catch (...) {
    return fromException();
  }
}

void fsmp_scenario_free(fsmp_scenario_t* sc) { delete sc; }

int fsmp_run(const fsmp_scenario_t* sc, const fsmp_run_options_t* opt, fsmp_run_result_t** out) {
  if (sc == nullptr || out == nullptr) {
    setError("null argument");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    fsmp::RunOptions o;
    if (opt != nullptr) {
      if (opt->metrics_path != nullptr) o.metrics_path = opt->metrics_path;
      if (opt->record_path != nullptr) o.record_path = opt->record_path;
      if (opt->verify != 0) {
        o.verify_frontiers = true;
        o.verify_roadmap = true;
        o.verify_planner = true;
        o.verify_nonrepetition = true;
      }
      o.mutation_batch = opt->mutation_batch;
      o.mutation_limit = opt->mutation_limit;
      o.mutation_seed = opt->mutation_seed;
      if (opt->log_progress != 0) o.log = &std::cerr;
    }
    auto* h = new fsmp_run_result{sc->sc, fsmp::runScenario(sc->sc, o), true, {}};
    if (h->r.verify_failed) {
      h->matched = false;
      h->detail = h->r.failure;
    }
    *out = h;
    return FSMP_OK;
  } catch (...) {
    return fromException();
  }
}

int fsmp_replay(const char* journal_path, int mutation_batch, int64_t mutation_limit,
                uint64_t mutation_seed, int log_progress, fsmp_run_result_t** out) {
  if (journal_path == nullptr || out == nullptr) {
    setError("null argument");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    const fsmp::ReplayResult rep = fsmp::replayJournal(
        journal_path, mutation_batch, mutation_limit, mutation_seed,
        log_progress != 0 ? &std::cerr : nullptr);
    auto* h = new fsmp_run_result{fsmp::Scenario{}, rep.run, rep.matched, rep.detail};
    *out = h;
    return FSMP_OK;
  } catch (...) {
    return fromException();
  }
}

int fsmp_result_exit_code(const fsmp_run_result_t* r) { return r ? r->r.exit_code : -1; }
int fsmp_result_complete(const fsmp_run_result_t* r) { return r && r->r.complete ? 1 : 0; }
int64_t fsmp_result_epochs(const fsmp_run_result_t* r) { return r ? r->r.epochs : 0; }
int64_t fsmp_result_scans(const fsmp_run_result_t* r) { return r ? r->r.scans : 0; }
double fsmp_result_sim_time(const fsmp_run_result_t* r) { return r ? r->r.sim_time : 0.0; }
double fsmp_result_distance(const fsmp_run_result_t* r) { return r ? r->r.distance : 0.0; }
double fsmp_result_coverage(const fsmp_run_result_t* r) { return r ? r->r.coverage : 0.0; }
int64_t fsmp_result_safety_violations(const fsmp_run_result_t* r) {
  return r ? r->r.safety_violations : 0;
}
int64_t fsmp_result_frontier_voxels(const fsmp_run_result_t* r) {
  return r ? r->r.frontier_voxels : 0;
}
int fsmp_result_verify_failed(const fsmp_run_result_t* r) {
  return r && r->r.verify_failed ? 1 : 0;
}
int64_t fsmp_result_failure_epoch(const fsmp_run_result_t* r) {
  return r ? r->r.failure_epoch : -1;
}
int fsmp_result_matched(const fsmp_run_result_t* r) { return r && r->matched ? 1 : 0; }

int fsmp_result_failure(const fsmp_run_result_t* r, char* buf, size_t* len) {
  if (r == nullptr) {
    setError("null result");
    return FSMP_ERR_NULL_POINTER;
  }
  const std::string& msg = r->detail.empty() ? r->r.failure : r->detail;
  return copyOut(msg, buf, len);
}

int fsmp_result_summary_csv(const fsmp_run_result_t* r, char* buf, size_t* len) {
  if (r == nullptr) {
    setError("null result");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    std::ostringstream os;
    fsmp::writeRunCsv(r->sc, r->r, os);
    return copyOut(os.str(), buf, len);
  } catch (...) {
    return fromException();
  }
}

void fsmp_result_free(fsmp_run_result_t* r) { delete r; }

int fsmp_bench(const fsmp_scenario_t* sc, const char* detectors_csv, int log_progress,
               fsmp_bench_result_t** out) {
  if (sc == nullptr || out == nullptr) {
    setError("null argument");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    std::vector<std::string> detectors;
    std::string csv = detectors_csv != nullptr ? detectors_csv : "f3d,aabb_rg,aabb_wfd";
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) detectors.push_back(item);
    if (detectors.empty()) {
      setError("no detectors requested");
      return FSMP_ERR_INVALID_ARGUMENT;
    }
    auto* h = new fsmp_bench_result{
        fsmp::benchScenario(sc->sc, detectors, log_progress != 0 ? &std::cerr : nullptr)};
    *out = h;
    return FSMP_OK;
  } catch (...) {
    return fromException();
  }
}

int fsmp_bench_sets_match(const fsmp_bench_result_t* r) {
  return r && r->report.sets_match ? 1 : 0;
}
int64_t fsmp_bench_epochs(const fsmp_bench_result_t* r) { return r ? r->report.epochs : 0; }

int fsmp_bench_csv(const fsmp_bench_result_t* r, char* buf, size_t* len) {
  if (r == nullptr) {
    setError("null result");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    std::ostringstream os;
    fsmp::writeBenchCsv(r->report, os);
    return copyOut(os.str(), buf, len);
  } catch (...) {
    return fromException();
  }
}

int fsmp_bench_summary(const fsmp_bench_result_t* r, char* buf, size_t* len) {
  if (r == nullptr) {
    setError("null result");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    std::ostringstream os;
    os << "detector,iterations,avg_scanned,std_scanned,avg_micros,std_micros\n";
    for (const auto& s : r->report.series) {
      const auto n = static_cast<double>(s.scanned.size());
      double mean_s = 0.0, mean_t = 0.0;
      for (std::size_t i = 0; i < s.scanned.size(); ++i) {
        mean_s += static_cast<double>(s.scanned[i]);
        mean_t += s.micros[i];
      }
      if (n > 0) {
        mean_s /= n;
        mean_t /= n;
      }
      double var_s = 0.0, var_t = 0.0;
      for (std::size_t i = 0; i < s.scanned.size(); ++i) {
        var_s += (static_cast<double>(s.scanned[i]) - mean_s) *
                 (static_cast<double>(s.scanned[i]) - mean_s);
        var_t += (s.micros[i] - mean_t) * (s.micros[i] - mean_t);
      }
      if (n > 1) {
        var_s /= n - 1;
        var_t /= n - 1;
      }
      os << s.name << "," << s.scanned.size() << "," << mean_s << "," << std::sqrt(var_s) << ","
         << mean_t << "," << std::sqrt(var_t) << "\n";
    }
    return copyOut(os.str(), buf, len);
  } catch (...) {
    return fromException();
  }
}

void fsmp_bench_result_free(fsmp_bench_result_t* r) { delete r; }

int fsmp_world_generate(const char* kind, double size_x, double size_y, double size_z,
                        double resolution, uint64_t seed, const char* out_path) {
  if (kind == nullptr || out_path == nullptr) {
    setError("null argument");
    return FSMP_ERR_NULL_POINTER;
  }
  try {
    const fsmp::Vec3 size{size_x, size_y, size_z};
    const std::string k = kind;
    fsmp::GroundTruthWorld w =
        k == "maze" ? fsmp::GroundTruthWorld::generateMaze(size, resolution, seed)
        : k == "building"
            ? fsmp::GroundTruthWorld::generateBuilding(size, resolution, seed)
            : throw std::invalid_argument("unknown world kind '" + k + "'");
    fsmp::writeSceneFile(w, out_path);
    return FSMP_OK;
  } catch (...) {
    return fromException();
  }
}

}  // extern "C"
