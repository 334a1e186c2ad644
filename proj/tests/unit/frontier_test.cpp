#include <fsmp/frontier_detector.hpp>
#include <fsmp/oracles.hpp>
#include <fsmp/sensor.hpp>
#include <fsmp/voxel_map.hpp>
#include <fsmp/world.hpp>

#include "../support/test_oracles.hpp"

#include <doctest.h>

#include <random>

using namespace fsmp;

TEST_CASE("frontier predicate: Free with an Unknown face neighbor") {
  VoxelMap m(Vec3::Zero(), 1.0, Vec3i{3, 3, 3});
  const Vec3i c{1, 1, 1};
  CHECK_FALSE(m.isFrontierVoxel(c));  // Unknown itself
  m.setState(c, VoxelState::Free, 1);
  CHECK(m.isFrontierVoxel(c));  // all six neighbors Unknown
  for (const Vec3i& n : m.neighbors6(c)) m.setState(n, VoxelState::Free, 1);
  CHECK_FALSE(m.isFrontierVoxel(c));  // no Unknown neighbor left
  m.setState(Vec3i{0, 1, 1}, VoxelState::Occupied, 1);
  CHECK_FALSE(m.isFrontierVoxel(c));  // Occupied neighbor does not count
  m.setState(Vec3i{2, 1, 1}, VoxelState::Unknown, 1);
  CHECK(m.isFrontierVoxel(c));
  m.setState(c, VoxelState::Occupied, 1);
  CHECK_FALSE(m.isFrontierVoxel(c));
  // corner voxel: diagonal neighbors are irrelevant
  m.setState(Vec3i{0, 0, 0}, VoxelState::Free, 1);
  m.setState(Vec3i{1, 0, 0}, VoxelState::Free, 1);
  m.setState(Vec3i{0, 1, 0}, VoxelState::Free, 1);
  m.setState(Vec3i{0, 0, 1}, VoxelState::Free, 1);
  CHECK_FALSE(m.isFrontierVoxel(Vec3i{0, 0, 0}));
}

namespace {

// Random direct-edit episode: flip a batch of voxels inside a box and return
// the FOV record that covers it (the normal change-reporting path).
FovRecord editBatch(VoxelMap& map, std::mt19937_64& rng, std::int32_t scan_id, bool cover) {
  std::uniform_int_distribution<int> lo_x(0, map.dims().x() - 1), lo_y(0, map.dims().y() - 1),
      lo_z(0, map.dims().z() - 1);
  std::uniform_int_distribution<int> span(1, 5), count(1, 40), state(0, 2);
  Aabb box;
  box.expand(Vec3i{lo_x(rng), lo_y(rng), lo_z(rng)});
  box.expand(box.min + Vec3i{span(rng), span(rng), span(rng)});
  box = box.intersection(Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()});
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const Vec3i p{std::uniform_int_distribution<int>(box.min.x(), box.max.x())(rng),
                  std::uniform_int_distribution<int>(box.min.y(), box.max.y())(rng),
                  std::uniform_int_distribution<int>(box.min.z(), box.max.z())(rng)};
    map.setState(p, static_cast<VoxelState>(state(rng)), scan_id);
  }
  FovRecord rec;
  rec.scan_id = scan_id;
  rec.voxel_box = cover ? box : Aabb{};  // uncovered edits exercise the changed+N6 path
  return rec;
}

}  // namespace

TEST_CASE("incremental detection equals full-grid relabeling under random edits") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    VoxelMap map(Vec3::Zero(), 0.2, Vec3i{16, 16, 8});
    FrontierStore store(map);
    FrontierDetector det(map, 25);
    det.setInstrumented(true);

    std::int32_t scan_id = 0;
    for (int round = 0; round < 40; ++round) {
      std::vector<FovRecord> fovs;
      const int batches = 1 + static_cast<int>(rng() % 3);
      for (int b = 0; b < batches; ++b)
        fovs.push_back(editBatch(map, rng, ++scan_id, (rng() % 4) != 0));
      const DetectionReport rep = det.detect(map, fovs, store);
      CHECK(rep.max_exams_per_voxel <= 1);

      const OracleReport naive = naiveDetect(map);
      REQUIRE(store.allFrontierVoxels() == naive.frontier_voxels);

      // every stored cluster respects the size cap and owns its members
      for (const auto& [id, f] : store.frontiers()) {
        CHECK(static_cast<int>(f.members.size()) <= 25);
        CHECK_FALSE(f.members.empty());
        for (const std::int32_t v : f.members) CHECK(store.ownerOf(v) == id);
      }
    }
  }
}

TEST_CASE("detection tracks real scans epoch by epoch") {
  GroundTruthWorld world = GroundTruthWorld::generateMaze(Vec3(6.0, 6.0, 2.0), 0.2, 3);
  const double res = 0.2;
  VoxelMap map = makeWorldMap(world, res);
  FrontierStore store(map);
  FrontierDetector det(map, 200);
  det.setInstrumented(true);

  SensorSpec spec;
  spec.min_range = 0.3;
  spec.max_range = 4.0;
  spec = resolvedSensor(spec, res);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> xy(0.4, 5.6), z(0.4, 1.6), yaw(-3.1, 3.1);
  std::int32_t scan_id = 0;
  int epochs = 0;
  while (epochs < 25) {
    const Pose pose{snapOffFaces(Vec3(xy(rng), xy(rng), z(rng)), res), yaw(rng)};
    if (!world.freeAt(pose.position)) continue;
    ++epochs;
    ++scan_id;
    const FovRecord rec = makeFovRecord(map, spec, pose, scan_id);
    map.integrateScan(capture(world, spec, pose), scan_id);
    const DetectionReport rep = det.detect(map, {rec}, store);
    CHECK(rep.max_exams_per_voxel <= 1);
    REQUIRE(store.allFrontierVoxels() == naiveDetect(map).frontier_voxels);
  }
  CHECK(store.frontierVoxelCount() > 0);
}

TEST_CASE("detector rejects out-of-order scan ids") {
  VoxelMap map(Vec3::Zero(), 0.2, Vec3i{8, 8, 8});
  FrontierStore store(map);
  FrontierDetector det(map, 50);
  FovRecord a;
  a.scan_id = 5;
  CHECK_NOTHROW(det.detect(map, {a}, store));
  FovRecord b;
  b.scan_id = 5;  // not strictly increasing across calls
  CHECK_THROWS_AS(det.detect(map, {b}, store), std::invalid_argument);
  FovRecord c;
  c.scan_id = 7;
  FovRecord d;
  d.scan_id = 6;  // out of order within the batch
  CHECK_THROWS_AS(det.detect(map, {c, d}, store), std::invalid_argument);
}

TEST_CASE("cluster extraction matches union-find components") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    VoxelMap map(Vec3::Zero(), 0.2, Vec3i{12, 12, 6});
    // random Free blob over Unknown background produces frontier surfaces
    std::uniform_int_distribution<int> x(0, 11), y(0, 11), z(0, 5);
    for (int i = 0; i < 80; ++i)
      map.setState(Vec3i{x(rng), y(rng), z(rng)}, VoxelState::Free, 1);

    const OracleReport naive = naiveDetect(map);
    if (naive.frontier_voxels.empty()) continue;
    const auto comps = test::components26(map, naive.frontier_voxels);

    FrontierStore store(map);
    FrontierDetector det(map, 1 << 20);  // no splitting: compare raw components
    for (const auto& comp : comps) {
      const Vec3i seed = map.indexFromLinear(comp.front());
      const std::vector<std::int32_t> got = det.extractFrontier(map, seed, store);
      CHECK(got == comp);
    }
    CHECK_THROWS_AS(det.extractFrontier(map, Vec3i{-1, 0, 0}, store), std::invalid_argument);
  }
}

TEST_CASE("cluster splitting partitions the input under the size cap") {
  std::mt19937_64 rng(67);
  VoxelMap map(Vec3::Zero(), 0.2, Vec3i{20, 20, 10});
  for (int trial = 0; trial < 30; ++trial) {
    std::set<std::int32_t> pick;
    std::uniform_int_distribution<int> x(0, 19), y(0, 19), z(0, 9);
    const int n = 2 + static_cast<int>(rng() % 500);
    for (int i = 0; i < n; ++i) pick.insert(map.linearIndex(Vec3i{x(rng), y(rng), z(rng)}));
    std::vector<std::int32_t> members(pick.begin(), pick.end());
    const int cap = 1 + static_cast<int>(rng() % 60);

    const auto parts = FrontierDetector::splitCluster(map, members, cap);
    std::vector<std::int32_t> merged;
    for (const auto& p : parts) {
      CHECK_FALSE(p.empty());
      CHECK(static_cast<int>(p.size()) <= cap);
      CHECK(std::is_sorted(p.begin(), p.end()));
      merged.insert(merged.end(), p.begin(), p.end());
    }
    std::sort(merged.begin(), merged.end());
    CHECK(merged == members);  // exact partition, nothing lost or duplicated

    // deterministic: a second call produces the identical partition
    CHECK(FrontierDetector::splitCluster(map, members, cap) == parts);
  }
}

TEST_CASE("store bookkeeping: install, erase, ownership") {
  VoxelMap map(Vec3::Zero(), 0.2, Vec3i{8, 8, 8});
  map.setState(Vec3i{1, 1, 1}, VoxelState::Free, 1);
  map.setState(Vec3i{2, 1, 1}, VoxelState::Free, 1);
  FrontierStore store(map);

  const std::int32_t a = store.install({map.linearIndex(Vec3i{1, 1, 1})}, map);
  const std::int32_t b = store.install({map.linearIndex(Vec3i{2, 1, 1})}, map);
  CHECK(a != b);
  CHECK(store.frontierVoxelCount() == 2);
  CHECK(store.ownerOf(map.linearIndex(Vec3i{1, 1, 1})) == a);
  CHECK(store.frontier(a).centroid == map.centerOf(Vec3i{1, 1, 1}));
  CHECK(store.frontier(a).box == Aabb{Vec3i{1, 1, 1}, Vec3i{1, 1, 1}});

  CHECK_THROWS_AS(store.install({map.linearIndex(Vec3i{1, 1, 1})}, map), std::logic_error);
  CHECK_THROWS_AS(store.install({}, map), std::invalid_argument);

  const auto members = store.erase(a);
  CHECK(members == std::vector<std::int32_t>{map.linearIndex(Vec3i{1, 1, 1})});
  CHECK(store.ownerOf(members[0]) == -1);
  CHECK_FALSE(store.has(a));
  CHECK_THROWS_AS(store.erase(a), std::invalid_argument);

  store.clear();
  CHECK(store.frontierVoxelCount() == 0);
  CHECK(store.allFrontierVoxels().empty());
}
