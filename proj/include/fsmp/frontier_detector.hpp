#pragma once

#include <fsmp/sensor.hpp>
#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>

#include <cstdint>
#include <map>
#include <vector>

namespace fsmp {

// A 26-connected cluster of frontier voxels. Members are sorted linear
// indices; centroid is the mean of member voxel centers.
struct Frontier {
  std::int32_t id = -1;
  std::vector<std::int32_t> members;
  Vec3 centroid = Vec3::Zero();
  Aabb box;
};

// Active frontiers plus the voxel -> frontier back-reference that doubles as
// the frontier-voxel membership set.
class FrontierStore {
 public:
  explicit FrontierStore(const VoxelMap& map);

  const std::map<std::int32_t, Frontier>& frontiers() const { return frontiers_; }
  bool has(std::int32_t id) const { return frontiers_.count(id) != 0; }
  const Frontier& frontier(std::int32_t id) const { return frontiers_.at(id); }

  // Frontier id owning this voxel, or -1.
  std::int32_t ownerOf(std::int32_t linear) const { return owner_[linear]; }
  std::size_t frontierVoxelCount() const { return voxel_count_; }

  // Takes ownership of a member set (must be frontier voxels, unowned);
  // computes centroid and AABB, assigns the next id.
  std::int32_t install(std::vector<std::int32_t> members, const VoxelMap& map);
  // Removes a frontier and returns its members (owners cleared).
  std::vector<std::int32_t> erase(std::int32_t id);
  void clear();

  // Sorted union of all member sets.
  std::vector<std::int32_t> allFrontierVoxels() const;

 private:
  std::map<std::int32_t, Frontier> frontiers_;  // ordered: deterministic iteration
  std::vector<std::int32_t> owner_;
  std::size_t voxel_count_ = 0;
  std::int32_t next_id_ = 0;
};

struct DetectionReport {
  std::vector<std::int32_t> new_ids;
  std::vector<std::int32_t> removed_ids;
  std::int64_t scanned_voxels = 0;        // distinct voxels frontier-examined
  std::int64_t roi_voxels = 0;            // sum of consumed FOV box volumes
  std::int64_t max_exams_per_voxel = 0;   // populated when instrumented; never exceeds 1
  std::uint64_t journal_consumed = 0;     // new journal begin after this call
  double elapsed_us = 0.0;                // wall time; excluded from metrics digests
};

// Incremental FOV-based frontier detection. Each call consumes the map's
// pending journal window together with the FOV records accumulated since the
// previous call, invalidates stale clusters, scans only the recorded boxes
// (skipping boxes without any journaled change), re-checks displaced members,
// and clusters new frontier voxels by 26-connected BFS, splitting clusters
// larger than n_max.
//
// Every frontier-status test inside one call is memoized per voxel, so no
// voxel is examined twice (reported via max_exams_per_voxel).
class FrontierDetector {
 public:
  explicit FrontierDetector(const VoxelMap& map, int n_max = 200);

  int nMax() const { return n_max_; }

  // Per-voxel examination counting: proof instrumentation for the at-most-
  // once property. Off by default so the hot path carries no audit cost.
  void setInstrumented(bool on) { instrumented_ = on; }

  // Throws std::invalid_argument when fov scan ids are not strictly
  // increasing (within the batch and across calls). Releases the journal
  // window it consumed.
  DetectionReport detect(VoxelMap& map, const std::vector<FovRecord>& fovs, FrontierStore& store);

  // BFS cluster extraction from one seed, excluding voxels already owned by
  // the store. Throws std::invalid_argument unless the seed is an unowned
  // frontier voxel. Returns sorted members; the store is not modified.
  std::vector<std::int32_t> extractFrontier(const VoxelMap& map, const Vec3i& seed,
                                            const FrontierStore& store);

  // Recursive longest-axis midpoint bisection of an oversized cluster. The
  // union of the outputs equals the input set; parts are not re-clustered,
  // so a part can be disconnected (viewpoint probing tolerates that).
  static std::vector<std::vector<std::int32_t>> splitCluster(const VoxelMap& map,
                                                             std::vector<std::int32_t> members,
                                                             int n_max);

 private:
  bool examine(const VoxelMap& map, std::int32_t linear);
  void beginRound(const VoxelMap& map);

  static constexpr int kTileEdge = 5;  // ROI sub-box edge, in voxels

  int n_max_;
  bool instrumented_ = false;
  std::int64_t last_scan_id_ = -1;
  std::int64_t scanned_round_ = 0;

  // per-call scratch, stamped by round number
  std::int32_t round_ = 0;
  std::vector<std::int32_t> exam_stamp_;
  std::vector<std::uint8_t> exam_result_;
  std::vector<std::uint16_t> exam_count_;
  std::vector<std::int32_t> exam_touched_;
  std::vector<std::int32_t> change_stamp_;
  std::vector<std::int32_t> bfs_stamp_;
  Vec3i tile_dims_ = Vec3i::Zero();
  std::vector<std::int32_t> tile_stamp_;
};

}  // namespace fsmp
