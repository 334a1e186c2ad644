#pragma once

#include <fsmp/roadmap.hpp>
#include <fsmp/sensor.hpp>
#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fsmp {

struct UtilityParams {
  double lambda = 0.5;         // motion-cost weight
  std::int64_t i_max = 0;      // gain upper bound; 0 = derive from sensor + resolution
  int yaw_bins = 8;
  int gain_ray_factor = 2;     // divides the capture ray counts for gain casts
};

// U = I * exp(-L), with L the already-weighted motion cost.
double utility(double gain, double cost);

// Largest admissible cost-path length once an incumbent with utility u
// exists: -(1/lambda) * ln(u / i_max). Infinite when lambda = 0 or u <= 0;
// zero when u reaches i_max.
double radiusBound(double u, double i_max, double lambda);

// Count of grid offsets within max_range plus margin: a voxel observable
// from a pose must have its center inside this ball, for any apex position
// and yaw — a conservative, pose-independent visibility bound.
std::int64_t visibilityVoxelBound(double max_range, double resolution);

struct CandidatePlan {
  bool found = false;
  std::int32_t node_id = -1;
  std::int32_t frontier_id = -1;
  double yaw = 0.0;
  std::int64_t gain = 0;
  double distance = 0.0;  // meters along the roadmap
  double cost = 0.0;      // lambda * distance
  double u = 0.0;
  std::vector<std::int32_t> node_path;  // anchor first (-1 = robot position)
  std::vector<Vec3> waypoints;          // robot position, then node positions
};

struct PlanStats {
  int candidates_total = 0;   // distinct candidate nodes
  int gain_evaluations = 0;   // yaw-optimized gain computations performed
  int nodes_settled = 0;
  std::vector<double> radius_trace;  // radius after each incumbent update
  double elapsed_us = 0.0;
};

// Temporary attachment of the robot position to the graph: collision-free
// edges to the nearest nodes within d_max (at most k), or a straight fallback
// edge to the Euclidean-nearest node when none qualify.
std::vector<std::pair<std::int32_t, double>> anchorEdges(const Roadmap& graph,
                                                         const VoxelMap& map, const Vec3& pos,
                                                         int k = 10);

// Utility-optimal candidate selection with lazily evaluated gains: Dijkstra
// from the robot anchor settles nodes in cost order; candidate gains are
// computed only on settlement; each incumbent shrinks the search radius via
// radiusBound. Result matches exhaustive evaluation exactly (ties broken by
// smaller node id).
class ExplorationPlanner {
 public:
  ExplorationPlanner(const SensorSpec& spec, double resolution, const UtilityParams& params);

  const UtilityParams& params() const { return params_; }
  std::int64_t iMax() const { return i_max_; }
  // Full-resolution capture grid; gain casts stride it by gain_ray_factor so
  // every gain direction is bit-identical to one of the capture directions
  // (a realized scan therefore covers everything the gain promised).
  const SensorSpec& gainSpec() const { return gain_spec_; }
  int strideH() const { return stride_h_; }
  int strideV() const { return stride_v_; }

  // Invalidate the per-epoch gain memo (call after the map changed).
  void bumpEpoch() { memo_.clear(); }

  // Unknown voxels visible from (position, yaw): counted once per voxel when
  // first pierced at a ray parameter within [min_range, max_range), rays
  // blocked by the first Occupied voxel. Throws std::invalid_argument when
  // the position voxel is not Free.
  std::int64_t voxelGain(const VoxelMap& map, const Vec3& position, double yaw);

  // Best (yaw, gain) over yaw_bins uniformly spaced directions; gain ties
  // resolve to the smallest normalized yaw.
  std::pair<double, std::int64_t> optimizeYaw(const VoxelMap& map, const Vec3& position);

  CandidatePlan plan(const Roadmap& graph, const std::vector<Candidate>& candidates,
                     const Pose& robot, const VoxelMap& map, PlanStats* stats = nullptr);

 private:
  std::pair<double, std::int64_t> memoizedYawGain(const VoxelMap& map, const Vec3& position,
                                                  std::int32_t node_id, PlanStats* stats);

  SensorSpec gain_spec_;
  int stride_h_ = 1;
  int stride_v_ = 1;
  double resolution_;
  UtilityParams params_;
  std::int64_t i_max_;
  std::unordered_map<std::int32_t, std::pair<double, std::int64_t>> memo_;
  std::vector<std::int32_t> seen_stamp_;
  std::int32_t seen_round_ = 0;
};

// Shortcut-smoothed, time-parameterized path.
struct SmoothedPath {
  std::vector<Pose> waypoints;      // first = start; yaws face along travel, last = target yaw
  std::vector<double> durations;    // per segment (waypoints.size() - 1)
  double length = 0.0;
  double total_duration = 0.0;
};

// Trapezoidal point-to-point time for a straight segment of length len.
double trapezoidTime(double len, double v_max, double a_max);

// Randomized-pair shortcutting (fixed internal seed) followed by segment
// subdivision to at most `max_leg` and trapezoidal timing per leg.
SmoothedPath smoothPath(const VoxelMap& map, const std::vector<Vec3>& points, double target_yaw,
                        double v_max, double a_max, double max_leg, int iterations = 100);

}  // namespace fsmp
