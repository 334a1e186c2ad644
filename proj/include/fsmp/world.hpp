#pragma once

#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fsmp {

struct ObstacleBox {
  Vec3 lo;
  Vec3 hi;
};

// Ground-truth geometry: a sealed rectangular volume containing axis-aligned
// obstacle boxes. The enclosing walls count as solid, so every ray cast from
// inside terminates. Generators snap all faces to the voxel grid, which keeps
// the voxelization unambiguous.
class GroundTruthWorld {
 public:
  GroundTruthWorld(const Vec3& lo, const Vec3& hi);

  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }
  const std::vector<ObstacleBox>& boxes() const { return boxes_; }
  void addBox(const Vec3& lo, const Vec3& hi);

  // Solid at p: inside an obstacle or outside the sealed interior.
  bool occupiedAt(const Vec3& p) const;
  bool freeAt(const Vec3& p) const { return !occupiedAt(p); }

  // Distance along unit `dir` from `start` to the first solid surface
  // (obstacle face or enclosing wall). `start` must lie in the interior;
  // the sealed shell guarantees a finite result.
  double castRay(const Vec3& start, const Vec3& dir) const;

  void write(std::ostream& os) const;
  static GroundTruthWorld read(std::istream& is);

  static GroundTruthWorld generateMaze(const Vec3& size, double resolution, std::uint64_t seed);
  static GroundTruthWorld generateBuilding(const Vec3& size, double resolution,
                                           std::uint64_t seed);

 private:
  Vec3 lo_;
  Vec3 hi_;
  std::vector<ObstacleBox> boxes_;
};

GroundTruthWorld readSceneFile(const std::string& path);
void writeSceneFile(const GroundTruthWorld& w, const std::string& path);

// Belief map sized for the world: the interior plus a one-voxel shell where
// wall hits land. World extents must be multiples of the resolution.
VoxelMap makeWorldMap(const GroundTruthWorld& world, double resolution);

// True state of a map voxel, sampled at its center (shell voxels and box
// interiors are Occupied, the rest Free).
VoxelState groundTruthState(const GroundTruthWorld& world, const VoxelMap& map, const Vec3i& v);

}  // namespace fsmp
