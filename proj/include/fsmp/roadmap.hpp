#pragma once

#include <fsmp/frontier_detector.hpp>
#include <fsmp/sensor.hpp>
#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fsmp {

// Straight segment through Free belief space only (Unknown blocks), checked
// by exact grid traversal over every pierced voxel. The one collision test
// shared by roadmap edges, candidate segments, smoothing, and execution.
bool segmentFree(const VoxelMap& map, const Vec3& a, const Vec3& b);

struct RoadmapParams {
  double d_min = 0.5;
  double d_max = 1.5;
  Vec3 sample_cell = Vec3::Constant(0.8);  // Sukharev cell edge lengths
  double z_min = -1e9;                     // flight band clamp for sampling
  double z_max = 1e9;
  double candidate_radius = 3.0;           // node search radius around a centroid (2*d_max)
  int candidate_k = 10;                    // nearest nodes examined per frontier
};

struct RoadmapNode {
  std::int32_t id = -1;
  Vec3 pos = Vec3::Zero();
  bool alive = false;
};

// Merged block of FOV boxes that touch new frontiers; where sampling happens.
struct SamplingRegion {
  Aabb box;
  std::vector<std::int32_t> scan_ids;
};

// A frontier paired with the roadmap node it is observable from.
struct Candidate {
  std::int32_t node_id = -1;
  std::int32_t frontier_id = -1;
};

// Undirected geometric graph over Free space. Nodes come from deterministic
// grid sampling inside merged FOV regions; edges are collision-free straight
// segments with length in [d_min, d_max]; pairwise node spacing >= d_min.
class Roadmap {
 public:
  Roadmap(const VoxelMap& map, const RoadmapParams& params);

  const RoadmapParams& params() const { return params_; }
  std::size_t nodeCount() const { return alive_count_; }
  std::size_t edgeCount() const { return edge_count_; }
  const std::vector<RoadmapNode>& nodes() const { return nodes_; }
  const RoadmapNode& node(std::int32_t id) const { return nodes_[id]; }
  const std::vector<std::pair<std::int32_t, double>>& edges(std::int32_t id) const {
    return adj_[id];
  }

  // FOVs that intersect at least one new frontier, transitively merged on
  // box overlap (union-find), each yielding its enclosing AABB.
  static std::vector<SamplingRegion> determineRegions(const std::vector<FovRecord>& fovs,
                                                      const std::vector<const Frontier*>& fresh);

  // Centroids of an l-sized cell partition of [lo, hi]; trailing partial
  // cells are clipped and contribute the centroid of the clipped part.
  static std::vector<Vec3> sukharevSamples(const Vec3& lo, const Vec3& hi, const Vec3& l);

  // Samples every region, keeps samples in Free voxels no closer than d_min
  // to existing nodes, and connects each new node to all nodes within d_max
  // through collision-free segments. Returns new node ids.
  std::vector<std::int32_t> extend(const VoxelMap& map, const std::vector<SamplingRegion>& regions);

  // Drops nodes whose voxel stopped being Free (with incident edges) and
  // edges that stopped being collision-free. Returns removed node ids.
  std::vector<std::int32_t> prune(const VoxelMap& map);

  // One candidate per frontier: nodes near the centroid are examined in
  // increasing distance (at most candidate_k within candidate_radius); the
  // first with a collision-free segment to the centroid wins. Frontiers with
  // none are skipped this epoch.
  std::vector<Candidate> assignCandidates(const VoxelMap& map, const FrontierStore& store) const;

  struct PathResult {
    bool found = false;
    std::vector<std::int32_t> node_path;
    double length = 0.0;
  };
  PathResult shortestPath(std::int32_t from, std::int32_t to) const;

  // Alive nodes within `radius` of p as (distance, id), nearest first.
  std::vector<std::pair<double, std::int32_t>> nearestNodes(const Vec3& p, double radius,
                                                            int max_count) const;
  std::int32_t nearestNode(const Vec3& p) const;        // -1 when empty
  double nearestNodeDistance(const Vec3& p) const;      // +inf when empty

  struct Violations {
    int node_not_free = 0;
    int edge_length = 0;
    int edge_collision = 0;
    int pair_too_close = 0;
    int asymmetric = 0;
    bool clean() const {
      return node_not_free == 0 && edge_length == 0 && edge_collision == 0 &&
             pair_too_close == 0 && asymmetric == 0;
    }
  };
  // Full geometric invariant sweep against the current map.
  Violations validate(const VoxelMap& map) const;

 private:
  std::int32_t addNode(const Vec3& pos);
  void removeNode(std::int32_t id);
  std::int64_t cellKey(const Vec3& p) const;
  template <typename Fn>
  void forEachNodeNear(const Vec3& p, double radius, Fn&& fn) const;

  RoadmapParams params_;
  double cell_size_;
  std::vector<RoadmapNode> nodes_;
  std::vector<std::vector<std::pair<std::int32_t, double>>> adj_;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> grid_;
  std::size_t alive_count_ = 0;
  std::size_t edge_count_ = 0;
};

}  // namespace fsmp
