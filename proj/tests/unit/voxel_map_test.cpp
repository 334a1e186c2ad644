#include <fsmp/raycast.hpp>
#include <fsmp/voxel_map.hpp>
#include <fsmp/world.hpp>

#include "../support/test_oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <sstream>
#include <tuple>

using namespace fsmp;

namespace {
VoxelMap smallMap() { return VoxelMap(Vec3::Zero(), 0.2, Vec3i{10, 10, 10}); }
}  // namespace

TEST_CASE("fresh map is all Unknown with consistent counters") {
  const VoxelMap m = smallMap();
  CHECK(m.voxelCount() == 1000);
  CHECK(m.countOf(VoxelState::Unknown) == 1000);
  CHECK(m.countOf(VoxelState::Free) == 0);
  CHECK(m.stateAt(Vec3i{0, 0, 0}) == VoxelState::Unknown);
  CHECK_THROWS_AS(m.stateAt(Vec3i{10, 0, 0}), std::out_of_range);
  CHECK_THROWS_AS(m.stateAt(Vec3i{0, -1, 0}), std::out_of_range);
}

TEST_CASE("linear index round trip covers the grid") {
  const VoxelMap m(Vec3(-1.0, 2.0, 0.5), 0.25, Vec3i{7, 5, 3});
  for (std::int32_t i = 0; i < m.voxelCount(); ++i) {
    const Vec3i p = m.indexFromLinear(i);
    CHECK(m.inBounds(p));
    CHECK(m.linearIndex(p) == i);
    CHECK(m.indexOf(m.centerOf(p)) == p);
  }
}

TEST_CASE("point-to-voxel assignment is half-open on faces") {
  const VoxelMap m = smallMap();
  // a point exactly on the shared face belongs to the upper cell
  CHECK(m.indexOf(Vec3(0.2, 0.1, 0.1)) == Vec3i(1, 0, 0));
  CHECK(m.indexOf(Vec3(0.0, 0.0, 0.0)) == Vec3i(0, 0, 0));
  CHECK(m.indexOf(Vec3(2.0, 0.1, 0.1)) == Vec3i(10, 0, 0));  // out of bounds, not wrapped
  CHECK_FALSE(m.inBounds(m.indexOf(Vec3(2.0, 0.1, 0.1))));
  CHECK(m.containsPoint(Vec3(1.99, 1.99, 1.99)));
  CHECK_FALSE(m.containsPoint(Vec3(-0.01, 0.5, 0.5)));
}

TEST_CASE("setState journals every transition with old and new state") {
  VoxelMap m = smallMap();
  m.setState(Vec3i{1, 2, 3}, VoxelState::Free, 7);
  m.setState(Vec3i{1, 2, 3}, VoxelState::Occupied, 8);
  m.setState(Vec3i{1, 2, 3}, VoxelState::Occupied, 9);  // no-op, not journaled

  REQUIRE(m.journalEnd() - m.journalBegin() == 2);
  const JournalEntry& e0 = m.journalAt(0);
  CHECK(e0.index == m.linearIndex(Vec3i{1, 2, 3}));
  CHECK(e0.old_state == VoxelState::Unknown);
  CHECK(e0.new_state == VoxelState::Free);
  CHECK(e0.scan_id == 7);
  const JournalEntry& e1 = m.journalAt(1);
  CHECK(e1.old_state == VoxelState::Free);
  CHECK(e1.new_state == VoxelState::Occupied);

  CHECK(m.countOf(VoxelState::Occupied) == 1);
  CHECK(m.countOf(VoxelState::Unknown) == 999);

  m.releaseJournal(1);
  CHECK(m.journalBegin() == 1);
  CHECK_THROWS_AS(m.journalAt(0), std::out_of_range);
  CHECK_THROWS_AS(m.setState(Vec3i{0, 0, 10}, VoxelState::Free, 1), std::out_of_range);
}

TEST_CASE("grid traversal matches the slab oracle on generic segments") {
  const Vec3 origin = Vec3::Zero();
  const double res = 0.2;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(0.05, 1.95);

  for (int k = 0; k < 300; ++k) {
    const Vec3 a{coord(rng), coord(rng), coord(rng)};
    const Vec3 b{coord(rng), coord(rng), coord(rng)};
    const double len = (b - a).norm();
    if (len < 1e-6) continue;
    const Vec3 dir = (b - a) / len;

    std::vector<Vec3i> visited;
    std::vector<double> entries;
    traverseGrid(origin, res, a, dir, len, [&](const Vec3i& c, double t) {
      visited.push_back(c);
      entries.push_back(t);
      return true;
    });

    // entry parameters are non-decreasing, successive cells face-adjacent
    for (std::size_t i = 1; i < visited.size(); ++i) {
      CHECK(entries[i] >= entries[i - 1]);
      CHECK((visited[i] - visited[i - 1]).cwiseAbs().sum() == 1);
    }

    // every cell with a real chord appears, and nothing outside the slab set
    const auto oracle = test::slabTrace(origin, res, a, dir, len, 1e-9);
    std::set<std::tuple<int, int, int>> vis, orc;
    for (const Vec3i& c : visited) vis.insert({c.x(), c.y(), c.z()});
    for (const auto& [t, c] : oracle) orc.insert({c.x(), c.y(), c.z()});
    for (const auto& c : orc) CHECK(vis.count(c) == 1);
    // allow traversal to include zero-chord corner cells the oracle skipped
    const auto loose = test::slabTrace(origin, res, a, dir, len, -1e-9);
    std::set<std::tuple<int, int, int>> loose_set;
    for (const auto& [t, c] : loose) loose_set.insert({c.x(), c.y(), c.z()});
    for (const auto& c : vis) CHECK(loose_set.count(c) == 1);
  }
}

TEST_CASE("grid traversal handles axis-aligned and degenerate segments") {
  const Vec3 origin = Vec3::Zero();
  std::vector<Vec3i> visited;
  traverseGrid(origin, 1.0, Vec3(0.5, 0.5, 0.5), Vec3(1, 0, 0), 3.0,
               [&](const Vec3i& c, double) {
                 visited.push_back(c);
                 return true;
               });
  REQUIRE(visited.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(visited[i] == Vec3i(i, 0, 0));

  visited.clear();
  traverseGrid(origin, 1.0, Vec3(0.5, 0.5, 0.5), Vec3(1, 0, 0), 0.0,
               [&](const Vec3i& c, double) {
                 visited.push_back(c);
                 return true;
               });
  CHECK(visited.empty());

  // early stop
  int count = 0;
  traverseGrid(origin, 1.0, Vec3(0.5, 0.5, 0.5), Vec3(1, 0, 0), 10.0, [&](const Vec3i&, double) {
    return ++count < 2;
  });
  CHECK(count == 2);
}

TEST_CASE("segment-box clipping agrees with containment sampling") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-2.0, 4.0);
  const Vec3 lo = Vec3::Zero();
  const Vec3 hi = Vec3::Constant(2.0);
  for (int k = 0; k < 300; ++k) {
    const Vec3 a{coord(rng), coord(rng), coord(rng)};
    const Vec3 b{coord(rng), coord(rng), coord(rng)};
    const double len = (b - a).norm();
    if (len < 1e-6) continue;
    const Vec3 dir = (b - a) / len;
    double t0 = 0.0, t1 = 0.0;
    const bool hit = clipSegmentToBox(a, dir, len, lo, hi, t0, t1);
    const auto inside = [&](double t) {
      const Vec3 p = a + dir * t;
      return (p.array() >= lo.array() - 1e-9).all() && (p.array() <= hi.array() + 1e-9).all();
    };
    for (int i = 0; i <= 100; ++i) {
      const double t = len * i / 100.0;
      if (!hit) {
        // no sampled point may be strictly inside when the clip reports a miss
        const Vec3 p = a + dir * t;
        const bool strictly_inside =
            (p.array() > lo.array() + 1e-9).all() && (p.array() < hi.array() - 1e-9).all();
        CHECK_FALSE(strictly_inside);
      } else if (t > t0 + 1e-9 && t < t1 - 1e-9) {
        CHECK(inside(t));
      }
    }
  }
}

TEST_CASE("scan integration never contradicts the ground truth") {
  GroundTruthWorld world(Vec3::Zero(), Vec3(4.0, 4.0, 2.0));
  world.addBox(Vec3(1.6, 1.6, 0.0), Vec3(2.4, 2.4, 2.0));
  const double res = 0.2;
  VoxelMap map = makeWorldMap(world, res);

  SensorSpec spec;
  spec.min_range = 0.1;
  spec.max_range = 5.0;
  spec = resolvedSensor(spec, res);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(0.3, 3.7), z(0.3, 1.7), yaw(-3.1, 3.1);
  int scan_id = 0;
  for (int k = 0; k < 12; ++k) {
    Pose pose{snapOffFaces(Vec3(xy(rng), xy(rng), z(rng)), res), yaw(rng)};
    if (!world.freeAt(pose.position)) continue;
    const DepthScan scan = capture(world, spec, pose);
    map.integrateScan(scan, ++scan_id);
  }

  std::int64_t known = 0;
  for (std::int32_t i = 0; i < map.voxelCount(); ++i) {
    const VoxelState s = map.stateAtLinear(i);
    if (s == VoxelState::Unknown) continue;
    ++known;
    const VoxelState truth = groundTruthState(world, map, map.indexFromLinear(i));
    CHECK(s == truth);
  }
  CHECK(known > 500);  // the scans actually observed a meaningful volume
}

TEST_CASE("a voxel both crossed and hit in one scan resolves to Occupied") {
  VoxelMap map(Vec3::Zero(), 1.0, Vec3i{6, 3, 3});
  DepthScan scan;
  scan.origin = Vec3(0.5, 1.5, 1.5);
  scan.min_range = 0.0;
  scan.max_range = 10.0;
  // first ray hits inside cell (3,1,1); second ray passes through it as free
  DepthRay hit;
  hit.dir = Vec3(1, 0, 0);
  hit.kind = DepthRay::Kind::Hit;
  hit.range = 3.0;  // endpoint on the face between cell 3 and 4 -> resolves into 3..4
  DepthRay miss;
  miss.dir = Vec3(1, 0, 0);
  miss.kind = DepthRay::Kind::Miss;
  miss.range = 0.0;
  scan.rays = {hit, miss};

  const Aabb changed = map.integrateScan(scan, 1);
  CHECK_FALSE(changed.empty());
  // the hit endpoint lands exactly on a face; the nudge resolves it into the
  // cell beyond, which must be Occupied even though the miss ray crossed it
  CHECK(map.stateAt(Vec3i{4, 1, 1}) == VoxelState::Occupied);
  CHECK(map.stateAt(Vec3i{1, 1, 1}) == VoxelState::Free);
  CHECK(map.stateAt(Vec3i{2, 1, 1}) == VoxelState::Free);
  // invalid rays change nothing
  DepthScan inv;
  inv.origin = scan.origin;
  inv.max_range = 10.0;
  DepthRay bad;
  bad.dir = Vec3(0, 1, 0);
  bad.kind = DepthRay::Kind::Invalid;
  bad.range = 0.0;
  inv.rays = {bad};
  CHECK(map.integrateScan(inv, 2).empty());
}

TEST_CASE("integration reports a tight changed box consumed by the journal") {
  VoxelMap map(Vec3::Zero(), 1.0, Vec3i{8, 8, 8});
  DepthScan scan;
  scan.origin = Vec3(0.5, 4.5, 4.5);
  scan.min_range = 0.0;
  scan.max_range = 4.0;
  DepthRay r;
  r.dir = Vec3(1, 0, 0);
  r.kind = DepthRay::Kind::Hit;
  r.range = 2.7;
  scan.rays = {r};
  const Aabb box = map.integrateScan(scan, 1);

  Aabb journal_box;
  for (std::uint64_t s = map.journalBegin(); s != map.journalEnd(); ++s)
    journal_box.expand(map.indexFromLinear(map.journalAt(s).index));
  CHECK(box == journal_box);
}

TEST_CASE("snapshot round trip preserves every voxel") {
  VoxelMap map(Vec3(-0.2, -0.2, -0.2), 0.2, Vec3i{5, 6, 7});
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 2);
  for (std::int32_t i = 0; i < map.voxelCount(); ++i)
    map.setState(map.indexFromLinear(i), static_cast<VoxelState>(pick(rng)), 1);

  std::stringstream ss;
  map.writeSnapshot(ss);
  const VoxelMap back = VoxelMap::readSnapshot(ss);
  CHECK(back.origin() == map.origin());
  CHECK(back.resolution() == map.resolution());
  CHECK(back.dims() == map.dims());
  for (std::int32_t i = 0; i < map.voxelCount(); ++i)
    CHECK(back.stateAtLinear(i) == map.stateAtLinear(i));
}
