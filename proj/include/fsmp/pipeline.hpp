#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fsmp/oracles.hpp"
#include "fsmp/scenario.hpp"

namespace fsmp {

// Per-epoch fingerprint captured into run journals and re-checked on replay.
struct EpochDigest {
  std::int64_t epoch = 0;
  Pose pose;
  std::uint64_t map_digest = 0;
  std::uint64_t frontier_digest = 0;
  std::int64_t clusters = 0;
  std::int64_t nodes = 0;
  std::int64_t edges = 0;
};

std::uint64_t digestMap(const VoxelMap& map);
std::uint64_t digestFrontiers(const FrontierStore& store);

// Side-by-side detector comparison fed by the run loop: every registered
// baseline sees the identical map stream and its frontier set is checked
// against the incremental detector's after every epoch.
class BenchCollector {
 public:
  explicit BenchCollector(std::vector<std::string> detectors);

  struct Series {
    std::string name;
    std::vector<std::int64_t> scanned;
    std::vector<double> micros;
  };

  bool wants(const std::string& name) const;
  void init(const VoxelMap& map, int split_limit);
  void onEpoch(const VoxelMap& map, const std::vector<Aabb>& change_boxes, const Vec3& robot_pos,
               const DetectionReport& f3d_report, const FrontierStore& store);

  const std::vector<Series>& series() const { return series_; }
  std::int64_t epochs() const { return epochs_; }
  bool setsMatch() const { return first_mismatch_ < 0; }
  std::int64_t firstMismatchEpoch() const { return first_mismatch_; }

 private:
  Series* find(const std::string& name);

  std::vector<std::string> detectors_;
  std::vector<Series> series_;
  std::unique_ptr<AabbRgDetector> rg_;
  std::unique_ptr<AabbWfdDetector> wfd_;
  std::int64_t epochs_ = 0;
  std::int64_t first_mismatch_ = -1;
};

struct RunOptions {
  std::string metrics_path;  // JSONL stream; timings go to <path>.timings
  std::string record_path;   // replayable run journal

  // Verification hooks (used by replay and the acceptance suite).
  bool verify_frontiers = false;     // detector set == full-grid relabeling, every epoch
  bool verify_roadmap = false;       // geometric invariant sweep, every epoch
  bool verify_planner = false;       // lazy selection == exhaustive selection, every replan
  bool verify_nonrepetition = false; // no voxel frontier-examined twice in one call

  const std::vector<EpochDigest>* expected = nullptr;  // replay comparison

  // Adversarial state flips inside this epoch's recorded FOV boxes,
  // journaled like any other write. Applied after each capture.
  int mutation_batch = 0;
  std::int64_t mutation_limit = 0;
  std::uint64_t mutation_seed = 0;

  BenchCollector* bench = nullptr;
  std::ostream* log = nullptr;  // optional human-readable progress
};

struct RunResult {
  int exit_code = 0;   // 0 = clean termination, 2 = budget exhausted
  bool complete = false;

  std::int64_t epochs = 0;
  std::int64_t scans = 0;
  double sim_time = 0.0;
  double distance = 0.0;

  std::int64_t coverage_denominator = 0;  // reachable free + its occupied shell
  std::int64_t covered_voxels = 0;
  double coverage = 0.0;

  std::int64_t safety_violations = 0;
  std::int64_t frontier_clusters = 0;
  std::int64_t frontier_voxels = 0;
  std::int64_t nodes = 0;
  std::int64_t edges = 0;
  std::int64_t detector_scanned_total = 0;
  std::int64_t mutations_injected = 0;

  bool verify_failed = false;
  std::int64_t failure_epoch = -1;
  std::string failure;

  double wall_ms = 0.0;
};

RunResult runScenario(const Scenario& sc, const RunOptions& opt = {});

// One CSV summary row (with header) for a finished run.
void writeRunCsv(const Scenario& sc, const RunResult& r, std::ostream& out);

struct ReplayResult {
  RunResult run;
  bool matched = false;        // digests equal (mutation replays skip this)
  std::int64_t mismatch_epoch = -1;
  std::string detail;
};

// Re-executes the journaled scenario and compares per-epoch digests. With
// mutations > 0 the digest comparison is replaced by the built-in oracle
// verification (the stream diverges by design).
ReplayResult replayJournal(const std::string& path, int mutation_batch = 0,
                           std::int64_t mutation_limit = 0, std::uint64_t mutation_seed = 0,
                           std::ostream* log = nullptr);

struct BenchReport {
  std::vector<BenchCollector::Series> series;
  std::int64_t epochs = 0;
  bool sets_match = true;
  std::int64_t first_mismatch_epoch = -1;
  RunResult run;
};

BenchReport benchScenario(const Scenario& sc, const std::vector<std::string>& detectors,
                          std::ostream* log = nullptr);
void writeBenchCsv(const BenchReport& report, std::ostream& out);

// Reachability denominator: ground-truth free voxels flood-filled (6-conn)
// from the start, plus occupied voxels face-adjacent to that free set.
std::vector<std::uint8_t> coverageMask(const GroundTruthWorld& world, const VoxelMap& map,
                                       const Vec3& start);

}  // namespace fsmp
