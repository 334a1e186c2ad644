#include <fsmp/sensor.hpp>
#include <fsmp/voxel_map.hpp>
#include <fsmp/world.hpp>

#include "../support/test_oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fsmp;

TEST_CASE("derived ray counts subtend at most one voxel at max range") {
  for (const double fov : {60.0, 90.0, 110.0, 150.0})
    for (const double range : {2.0, 5.0, 10.0})
      for (const double res : {0.05, 0.1, 0.2}) {
        const int n = derivedRayCount(fov, range, res);
        CHECK(n >= 2);
        const double footprint = 2.0 * std::tan(fov * M_PI / 360.0) * range;
        CHECK(footprint / (n - 1) <= res + 1e-12);
      }
}

TEST_CASE("sensor validation rejects degenerate parameters") {
  SensorSpec s;
  s.rays_h = 4;
  s.rays_v = 4;
  CHECK_NOTHROW(validateSensor(s));
  SensorSpec bad = s;
  bad.hfov_deg = 180.0;
  CHECK_THROWS_AS(validateSensor(bad), std::invalid_argument);
  bad = s;
  bad.vfov_deg = 0.0;
  CHECK_THROWS_AS(validateSensor(bad), std::invalid_argument);
  bad = s;
  bad.min_range = 5.0;  // >= max
  CHECK_THROWS_AS(validateSensor(bad), std::invalid_argument);
  bad = s;
  bad.rays_h = 1;
  CHECK_THROWS_AS(validateSensor(bad), std::invalid_argument);

  SensorSpec placeholder;
  placeholder.rays_h = 0;
  placeholder.rays_v = 0;
  const SensorSpec r = resolvedSensor(placeholder, 0.2);
  CHECK(r.rays_h >= 2);
  CHECK(r.rays_v >= 2);
}

TEST_CASE("camera frame is a right-handed level basis") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> yaw(-3.14, 3.14);
  for (int i = 0; i < 200; ++i) {
    const double y = yaw(rng);
    const CameraFrame f = cameraFrame(y);
    CHECK(f.forward.norm() == doctest::Approx(1.0));
    CHECK(f.left.norm() == doctest::Approx(1.0));
    CHECK(f.up == Vec3(0, 0, 1));
    CHECK(std::abs(f.forward.dot(f.left)) < 1e-12);
    CHECK((f.forward.cross(f.left) - f.up).norm() < 1e-12);
    CHECK(f.forward.x() == doctest::Approx(std::cos(y)));
    CHECK(f.forward.y() == doctest::Approx(std::sin(y)));
  }
}

TEST_CASE("capture depths match an independent slab intersector") {
  GroundTruthWorld world(Vec3::Zero(), Vec3(6.0, 6.0, 3.0));
  world.addBox(Vec3(2.0, 2.0, 0.0), Vec3(3.0, 4.0, 3.0));
  world.addBox(Vec3(4.2, 1.0, 0.6), Vec3(5.0, 1.8, 2.2));

  SensorSpec spec;
  spec.rays_h = 21;
  spec.rays_v = 11;
  spec.min_range = 0.3;
  spec.max_range = 5.0;

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> xy(0.4, 5.6), z(0.4, 2.6), yaw(-3.1, 3.1);
  int poses = 0;
  while (poses < 20) {
    const Pose pose{Vec3(xy(rng), xy(rng), z(rng)), yaw(rng)};
    if (!world.freeAt(pose.position)) continue;
    ++poses;
    const DepthScan scan = capture(world, spec, pose);
    REQUIRE(scan.rays.size() == 21u * 11u);
    for (const DepthRay& ray : scan.rays) {
      CHECK(ray.dir.norm() == doctest::Approx(1.0));
      const double t = test::firstHitSlabs(world, pose.position, ray.dir);
      if (ray.kind == DepthRay::Kind::Hit) {
        CHECK(ray.range == doctest::Approx(t).epsilon(1e-9));
        CHECK(ray.range >= spec.min_range);
        CHECK(ray.range <= spec.max_range);
      } else if (ray.kind == DepthRay::Kind::Miss) {
        CHECK(t > spec.max_range - 1e-9);
      } else {
        CHECK(t < spec.min_range + 1e-9);
      }
    }
  }
}

TEST_CASE("capture rays stay inside the field of view") {
  GroundTruthWorld world(Vec3::Zero(), Vec3(4.0, 4.0, 2.0));
  SensorSpec spec;
  spec.rays_h = 15;
  spec.rays_v = 9;
  spec.hfov_deg = 110.0;
  spec.vfov_deg = 90.0;
  spec.min_range = 0.1;
  spec.max_range = 5.0;
  const Pose pose{Vec3(2.0, 2.0, 1.0), 0.7};
  const CameraFrame cam = cameraFrame(pose.yaw);
  for (const DepthRay& ray : capture(world, spec, pose).rays) {
    const double f = ray.dir.dot(cam.forward);
    CHECK(f > 0.0);
    CHECK(std::abs(ray.dir.dot(cam.left) / f) <= spec.tanHalfH() + 1e-9);
    CHECK(std::abs(ray.dir.dot(cam.up) / f) <= spec.tanHalfV() + 1e-9);
  }
  CHECK_THROWS_AS(capture(world, spec, Pose{Vec3(-0.1, 2.0, 1.0), 0.0}), std::invalid_argument);
}

TEST_CASE("frustum voxel box bounds every voxel a scan can touch") {
  GroundTruthWorld world(Vec3::Zero(), Vec3(6.0, 6.0, 3.0));
  world.addBox(Vec3(2.2, 2.2, 0.0), Vec3(3.0, 3.4, 3.0));
  const double res = 0.2;
  SensorSpec spec;
  spec.min_range = 0.3;
  spec.max_range = 4.0;
  spec = resolvedSensor(spec, res);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> xy(0.4, 5.6), z(0.4, 2.6), yaw(-3.1, 3.1);
  int poses = 0;
  while (poses < 15) {
    const Pose pose{snapOffFaces(Vec3(xy(rng), xy(rng), z(rng)), res), yaw(rng)};
    if (!world.freeAt(pose.position)) continue;
    ++poses;
    VoxelMap map = makeWorldMap(world, res);
    const FovRecord rec = makeFovRecord(map, spec, pose, poses);
    CHECK(rec.scan_id == poses);
    const Aabb changed = map.integrateScan(capture(world, spec, pose), poses);
    if (changed.empty()) continue;
    CHECK(rec.voxel_box.contains(changed.min));
    CHECK(rec.voxel_box.contains(changed.max));
  }
}
