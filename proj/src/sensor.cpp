#include <fsmp/sensor.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fsmp {

namespace {
constexpr double kPi = std::numbers::pi;
double degToRad(double d) { return d * kPi / 180.0; }
}  // namespace

double SensorSpec::tanHalfH() const { return std::tan(degToRad(hfov_deg) / 2.0); }
double SensorSpec::tanHalfV() const { return std::tan(degToRad(vfov_deg) / 2.0); }

void validateSensor(const SensorSpec& spec) {
  if (!(spec.hfov_deg > 0.0 && spec.hfov_deg < 180.0))
    throw std::invalid_argument("sensor: horizontal FOV must be in (0, 180) degrees");
  if (!(spec.vfov_deg > 0.0 && spec.vfov_deg < 180.0))
    throw std::invalid_argument("sensor: vertical FOV must be in (0, 180) degrees");
  if (!(spec.min_range >= 0.0 && spec.min_range < spec.max_range))
    throw std::invalid_argument("sensor: require 0 <= min range < max range");
  if (spec.rays_h < 2 || spec.rays_v < 2)
    throw std::invalid_argument("sensor: ray counts must be at least 2");
}

int derivedRayCount(double fov_deg, double max_range, double resolution) {
  // One ray per voxel subtended at max range: the far-plane footprint is
  // 2*tan(fov/2)*range meters wide.
  const double footprint = 2.0 * std::tan(degToRad(fov_deg) / 2.0) * max_range;
  const int n = static_cast<int>(std::ceil(footprint / resolution)) + 1;
  return n < 2 ? 2 : n;
}

SensorSpec resolvedSensor(SensorSpec spec, double resolution) {
  if (spec.rays_h == 0) spec.rays_h = derivedRayCount(spec.hfov_deg, spec.max_range, resolution);
  if (spec.rays_v == 0) spec.rays_v = derivedRayCount(spec.vfov_deg, spec.max_range, resolution);
  validateSensor(spec);
  return spec;
}

double normalizeYaw(double yaw) {
  double a = std::fmod(yaw + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

CameraFrame cameraFrame(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return CameraFrame{Vec3{c, s, 0.0}, Vec3{-s, c, 0.0}, Vec3{0.0, 0.0, 1.0}};
}

DepthScan capture(const GroundTruthWorld& world, const SensorSpec& spec, const Pose& pose) {
  validateSensor(spec);
  // Closed bounds: sampled viewpoints may sit exactly on a wall face plane,
  // where the voxel they index is still interior.
  for (int a = 0; a < 3; ++a)
    if (pose.position[a] < world.lo()[a] || pose.position[a] > world.hi()[a])
      throw std::invalid_argument("capture: pose outside world interior");

  const CameraFrame cam = cameraFrame(pose.yaw);
  const double W = spec.tanHalfH();
  const double H = spec.tanHalfV();

  DepthScan scan;
  scan.origin = pose.position;
  scan.min_range = spec.min_range;
  scan.max_range = spec.max_range;
  scan.rays.reserve(static_cast<std::size_t>(spec.rays_h) * spec.rays_v);

  for (int j = 0; j < spec.rays_v; ++j) {
    const double b = -H + (2.0 * H) * j / (spec.rays_v - 1);
    for (int i = 0; i < spec.rays_h; ++i) {
      const double a = -W + (2.0 * W) * i / (spec.rays_h - 1);
      const Vec3 dir = (cam.forward + a * cam.left + b * cam.up).normalized();
      const double t = world.castRay(pose.position, dir);
      DepthRay ray;
      ray.dir = dir;
      if (t > spec.max_range) {
        ray.kind = DepthRay::Kind::Miss;
        ray.range = 0.0;
      } else if (t < spec.min_range) {
        ray.kind = DepthRay::Kind::Invalid;
        ray.range = 0.0;
      } else {
        ray.kind = DepthRay::Kind::Hit;
        ray.range = t;
      }
      scan.rays.push_back(ray);
    }
  }
  return scan;
}

std::array<Vec3, 5> frustumCorners(const SensorSpec& spec, const Pose& pose) {
  if (spec.hfov_deg >= 180.0 || spec.vfov_deg >= 180.0)
    throw std::invalid_argument("frustumCorners: FOV must be < 180 degrees");
  const CameraFrame cam = cameraFrame(pose.yaw);
  const double R = spec.max_range;
  const double W = spec.tanHalfH() * R;
  const double H = spec.tanHalfV() * R;
  const Vec3 far_center = pose.position + R * cam.forward;
  return {pose.position, far_center + W * cam.left + H * cam.up,
          far_center - W * cam.left + H * cam.up, far_center + W * cam.left - H * cam.up,
          far_center - W * cam.left - H * cam.up};
}

Aabb frustumVoxelAabb(const VoxelMap& map, const SensorSpec& spec, const Pose& pose) {
  Aabb box;
  if (spec.hfov_deg >= 180.0 || spec.vfov_deg >= 180.0) {
    box.expand(map.indexOf(pose.position - Vec3::Constant(spec.max_range)));
    box.expand(map.indexOf(pose.position + Vec3::Constant(spec.max_range)));
  } else {
    for (const Vec3& c : frustumCorners(spec, pose)) box.expand(map.indexOf(c));
  }
  box = box.inflated(1);
  const Aabb grid{Vec3i::Zero(), map.dims() - Vec3i::Ones()};
  return box.intersection(grid);
}

FovRecord makeFovRecord(const VoxelMap& map, const SensorSpec& spec, const Pose& pose,
                        std::int32_t scan_id) {
  return FovRecord{pose, spec, frustumVoxelAabb(map, spec, pose), scan_id};
}

}  // namespace fsmp
