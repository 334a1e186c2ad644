#pragma once

#include <fsmp/scan.hpp>
#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>
#include <fsmp/world.hpp>

#include <array>
#include <cstdint>

namespace fsmp {

// Forward-looking depth camera. Ray counts of 0 are placeholders for "derive
// from the map resolution" (one ray per voxel subtended at max range), fixed
// by resolvedSensor().
struct SensorSpec {
  double hfov_deg = 110.0;
  double vfov_deg = 90.0;
  double min_range = 0.5;
  double max_range = 5.0;
  int rays_h = 0;
  int rays_v = 0;

  double tanHalfH() const;
  double tanHalfV() const;
};

// Throws std::invalid_argument unless 0<fov<180 per axis, 0<=min<max range,
// and ray counts are >=2 (after resolution).
void validateSensor(const SensorSpec& spec);

int derivedRayCount(double fov_deg, double max_range, double resolution);
SensorSpec resolvedSensor(SensorSpec spec, double resolution);

struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;  // about +z, normalized to (-pi, pi]
};

double normalizeYaw(double yaw);

// Camera basis for a level sensor: forward, left, up.
struct CameraFrame {
  Vec3 forward;
  Vec3 left;
  Vec3 up;
};
CameraFrame cameraFrame(double yaw);

// One FOV capture: pose, spec, and the voxel-space box that bounds every
// voxel the scan can have touched. This is the ROI unit the detector and the
// roadmap sampler consume.
struct FovRecord {
  Pose pose;
  SensorSpec spec;
  Aabb voxel_box;
  std::int32_t scan_id = 0;
};

// Exact first-hit depth image against the ground truth. Rays are laid on a
// uniform tangent-space grid (pinhole), row-major bottom-to-top. Hits beyond
// max range become Miss; closer than min range become Invalid.
// Throws std::invalid_argument when the pose is outside the world interior.
DepthScan capture(const GroundTruthWorld& world, const SensorSpec& spec, const Pose& pose);

// Apex + 4 far-plane corners (flat far plane at max_range along forward).
// Requires both FOVs < 180 degrees.
std::array<Vec3, 5> frustumCorners(const SensorSpec& spec, const Pose& pose);

// Voxel AABB covering the frustum, padded by one voxel and clipped to the
// map. FOVs of 180 degrees or more fall back to the full range-sphere box.
Aabb frustumVoxelAabb(const VoxelMap& map, const SensorSpec& spec, const Pose& pose);

FovRecord makeFovRecord(const VoxelMap& map, const SensorSpec& spec, const Pose& pose,
                        std::int32_t scan_id);

}  // namespace fsmp
