#pragma once

#include <fsmp/planner.hpp>
#include <fsmp/roadmap.hpp>
#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace fsmp {

// Reference implementations for verification and benchmarking. None of them
// shares state with the incremental detector: independence is the point.

struct OracleReport {
  std::vector<std::int32_t> frontier_voxels;  // sorted; empty unless exported
  std::int64_t scanned_voxels = 0;
  double elapsed_us = 0.0;
};

// Full-grid frontier labeling; the ground truth every detector must match.
OracleReport naiveDetect(const VoxelMap& map);

// Region-growing baseline: merges the epoch's change boxes into a single
// enclosing AABB (inflated by one voxel), rescans every voxel of it against
// a persistent frontier-flag grid, discards every stored cluster the box
// touches, and re-grows, splits, and re-installs clusters with centroids and
// bounds — the same per-epoch product the incremental detector maintains.
class AabbRgDetector {
 public:
  AabbRgDetector(const VoxelMap& map, int split_limit);
  OracleReport detect(const VoxelMap& map, const std::vector<Aabb>& change_boxes);
  // Current frontier-voxel set (sorted).
  std::vector<std::int32_t> frontierVoxels() const;

 private:
  struct Cluster {
    std::vector<std::int32_t> members;  // sorted
    Vec3 centroid = Vec3::Zero();
    Aabb box;
  };

  int split_limit_ = 200;
  std::int32_t next_id_ = 0;
  std::vector<std::uint8_t> flag_;
  std::vector<std::int32_t> owner_;  // cluster id per voxel, -1 when none
  std::map<std::int32_t, Cluster> clusters_;
};

// Wavefront baseline: walks the known Free space inside the merged box from
// deterministic seeds (robot voxel, box-face Free voxels, previously stored
// frontier voxels) with the classic four-set hash bookkeeping.
class AabbWfdDetector {
 public:
  explicit AabbWfdDetector(const VoxelMap& map);
  OracleReport detect(const VoxelMap& map, const std::vector<Aabb>& change_boxes,
                      const Vec3& robot_pos);
  std::vector<std::int32_t> frontierVoxels() const;

 private:
  std::set<std::int32_t> stored_;
};

// Merge + inflate + clip shared by both baselines.
Aabb mergedChangeBox(const VoxelMap& map, const std::vector<Aabb>& change_boxes);

// Evaluates every graph-reachable candidate: full Dijkstra from the robot
// anchor, gain for each candidate node in ascending id, identical tie-break.
// Uses the provided planner's gain function (and its memo/eval counters), so
// pair it with a dedicated planner instance.
CandidatePlan exhaustivePlan(ExplorationPlanner& planner, const Roadmap& graph,
                             const std::vector<Candidate>& candidates, const Pose& robot,
                             const VoxelMap& map, PlanStats* stats = nullptr);

}  // namespace fsmp
