#include <fsmp/roadmap.hpp>
#include <fsmp/voxel_map.hpp>

#include "../support/test_oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fsmp;

namespace {

VoxelMap openMap(const Vec3i& dims, double res) {
  VoxelMap m(Vec3::Zero(), res, dims);
  for (std::int32_t v = 0; v < m.voxelCount(); ++v)
    m.setState(m.indexFromLinear(v), VoxelState::Free, 1);
  return m;
}

// Brute-force sweep of every roadmap invariant, independent of validate().
void checkInvariants(const Roadmap& g, const VoxelMap& map) {
  const auto& ns = g.nodes();
  std::size_t edges_seen = 0;
  for (const RoadmapNode& n : ns) {
    if (!n.alive) continue;
    CHECK(map.stateAtPoint(n.pos) == VoxelState::Free);
    for (const auto& [to, len] : g.edges(n.id)) {
      CHECK(ns[to].alive);
      const double d = (ns[to].pos - n.pos).norm();
      CHECK(d == doctest::Approx(len).epsilon(1e-12));
      CHECK(len >= g.params().d_min);
      CHECK(len <= g.params().d_max);
      CHECK(segmentFree(map, n.pos, ns[to].pos));
      // symmetry: the reverse edge exists with the same length
      bool back = false;
      for (const auto& [to2, len2] : g.edges(to))
        if (to2 == n.id && len2 == len) back = true;
      CHECK(back);
      ++edges_seen;
    }
    for (const RoadmapNode& m2 : ns) {
      if (!m2.alive || m2.id <= n.id) continue;
      CHECK((m2.pos - n.pos).norm() >= g.params().d_min - 1e-12);
    }
  }
  CHECK(edges_seen == 2 * g.edgeCount());
  const Roadmap::Violations v = g.validate(map);
  CHECK(v.clean());
}

}  // namespace

TEST_CASE("segment collision test: Unknown and Occupied both block") {
  VoxelMap m(Vec3::Zero(), 0.5, Vec3i{8, 4, 4});
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z) m.setState(Vec3i{x, y, z}, VoxelState::Free, 1);
  const Vec3 a(0.25, 1.25, 1.25), b(3.75, 1.25, 1.25);
  CHECK(segmentFree(m, a, b));
  m.setState(Vec3i{4, 2, 2}, VoxelState::Unknown, 2);
  CHECK(segmentFree(m, a, b));  // off the line
  m.setState(Vec3i{4, 2, 2}, VoxelState::Occupied, 2);
  CHECK(segmentFree(m, a, b));
  m.setState(Vec3i{4, 2, 2}, VoxelState::Free, 2);
  m.setState(Vec3i{5, 2, 2}, VoxelState::Unknown, 2);
  CHECK(m.indexOf(Vec3(2.75, 1.25, 1.25)) == Vec3i{5, 2, 2});
  CHECK_FALSE(segmentFree(m, a, Vec3(2.75, 1.25, 1.25)));  // endpoint voxel Unknown
  m.setState(Vec3i{5, 2, 2}, VoxelState::Free, 2);
  m.setState(Vec3i{2, 2, 2}, VoxelState::Occupied, 2);
  CHECK_FALSE(segmentFree(m, a, b));  // pierced voxel Occupied
  // zero-length segment: just the containing voxel
  CHECK(segmentFree(m, a, a));
  m.setState(Vec3i{0, 2, 2}, VoxelState::Unknown, 2);
  CHECK_FALSE(segmentFree(m, a, a));
  // leaving the volume blocks
  CHECK_FALSE(segmentFree(m, b, Vec3(10.0, 1.25, 1.25)));
}

TEST_CASE("grid sampling: counts and clipped trailing cells") {
  const Vec3 lo(0.0, 0.0, 0.0), hi(2.0, 1.0, 0.5);
  const auto s = Roadmap::sukharevSamples(lo, hi, Vec3(0.8, 0.5, 0.5));
  // x: cells [0,0.8),[0.8,1.6),[1.6,2.0] -> 3; y: 2; z: 1
  CHECK(s.size() == 3 * 2 * 1);
  // first full cell centroid
  CHECK(s[0].x() == doctest::Approx(0.4));
  CHECK(s[0].y() == doctest::Approx(0.25));
  CHECK(s[0].z() == doctest::Approx(0.25));
  // trailing partial x-cell is [1.6, 2.0]: centroid 1.8
  double max_x = 0.0;
  for (const Vec3& p : s) max_x = std::max(max_x, p.x());
  CHECK(max_x == doctest::Approx(1.8));
  for (const Vec3& p : s) {
    CHECK(p.x() >= lo.x());
    CHECK(p.x() <= hi.x());
    CHECK(p.y() >= lo.y());
    CHECK(p.y() <= hi.y());
  }
  // degenerate interval still yields one sample at its middle
  const auto s2 = Roadmap::sukharevSamples(Vec3::Zero(), Vec3(0.0, 1.0, 1.0), Vec3::Constant(0.5));
  for (const Vec3& p : s2) CHECK(p.x() == doctest::Approx(0.0));
}

TEST_CASE("region merging is transitive across box overlap") {
  Frontier fa;
  fa.id = 0;
  fa.box = Aabb{Vec3i{0, 0, 0}, Vec3i{2, 2, 2}};
  Frontier fb;
  fb.id = 1;
  fb.box = Aabb{Vec3i{20, 0, 0}, Vec3i{22, 2, 2}};
  std::vector<const Frontier*> fresh{&fa, &fb};

  FovRecord r1;
  r1.scan_id = 1;
  r1.voxel_box = Aabb{Vec3i{0, 0, 0}, Vec3i{5, 5, 5}};  // touches fa
  FovRecord r2;
  r2.scan_id = 2;
  r2.voxel_box = Aabb{Vec3i{5, 0, 0}, Vec3i{12, 5, 5}};  // overlaps r1, no frontier
  FovRecord r3;
  r3.scan_id = 3;
  r3.voxel_box = Aabb{Vec3i{18, 0, 0}, Vec3i{25, 5, 5}};  // touches fb, disjoint from r1/r2
  FovRecord r4;
  r4.scan_id = 4;
  r4.voxel_box = Aabb{Vec3i{40, 40, 0}, Vec3i{45, 45, 5}};  // touches nothing

  const auto regions = Roadmap::determineRegions({r1, r2, r3, r4}, fresh);
  REQUIRE(regions.size() == 2);
  // r2 joins r1's region through overlap even though r2 saw no new frontier
  bool found_merged = false, found_single = false;
  for (const SamplingRegion& reg : regions) {
    if (reg.scan_ids.size() == 2) {
      CHECK(reg.box == Aabb{Vec3i{0, 0, 0}, Vec3i{12, 5, 5}});
      CHECK(reg.scan_ids == std::vector<std::int32_t>{1, 2});
      found_merged = true;
    }
    if (reg.scan_ids.size() == 1) {
      CHECK(reg.box == Aabb{Vec3i{18, 0, 0}, Vec3i{25, 5, 5}});
      CHECK(reg.scan_ids == std::vector<std::int32_t>{3});
      found_single = true;
    }
  }
  CHECK(found_merged);
  CHECK(found_single);

  CHECK(Roadmap::determineRegions({}, fresh).empty());
  CHECK(Roadmap::determineRegions({r1}, {}).empty());
}

TEST_CASE("extend and prune keep every graph invariant on a mutating map") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 5; ++trial) {
    VoxelMap map = openMap(Vec3i{24, 24, 8}, 0.25);
    RoadmapParams p;
    p.d_min = 0.4;
    p.d_max = 1.2;
    p.sample_cell = Vec3::Constant(0.55);
    Roadmap g(map, p);

    SamplingRegion whole;
    whole.box = Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()};
    const auto added = g.extend(map, {whole});
    CHECK_FALSE(added.empty());
    CHECK(g.nodeCount() == added.size());
    CHECK(g.edgeCount() > 0);
    checkInvariants(g, map);

    // degrade the map: random blobs flip Free -> Occupied/Unknown, then prune
    for (int round = 0; round < 4; ++round) {
      std::uniform_int_distribution<int> x(0, 23), y(0, 23), z(0, 7), st(0, 1);
      for (int i = 0; i < 120; ++i)
        map.setState(Vec3i{x(rng), y(rng), z(rng)},
                     st(rng) ? VoxelState::Occupied : VoxelState::Unknown, 2 + round);
      const auto removed = g.prune(map);
      checkInvariants(g, map);
      for (const std::int32_t id : removed) CHECK_FALSE(g.node(id).alive);
      // extending again keeps invariants on the degraded map
      g.extend(map, {whole});
      checkInvariants(g, map);
    }
  }
}

TEST_CASE("extension is deterministic") {
  VoxelMap map = openMap(Vec3i{20, 20, 6}, 0.25);
  RoadmapParams p;
  p.d_min = 0.4;
  p.d_max = 1.2;
  SamplingRegion whole;
  whole.box = Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()};

  Roadmap a(map, p), b(map, p);
  a.extend(map, {whole});
  b.extend(map, {whole});
  REQUIRE(a.nodes().size() == b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].pos == b.nodes()[i].pos);
    CHECK(a.edges(static_cast<std::int32_t>(i)) == b.edges(static_cast<std::int32_t>(i)));
  }
}

TEST_CASE("nearest-node queries against a brute-force scan") {
  VoxelMap map = openMap(Vec3i{30, 30, 8}, 0.25);
  RoadmapParams p;
  p.d_min = 0.35;
  p.d_max = 1.1;
  p.sample_cell = Vec3::Constant(0.5);
  Roadmap g(map, p);
  SamplingRegion whole;
  whole.box = Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()};
  g.extend(map, {whole});
  REQUIRE(g.nodeCount() > 20);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 7.5), r(0.3, 4.0);
  for (int q = 0; q < 50; ++q) {
    const Vec3 probe(u(rng), u(rng), u(rng) * 0.25);
    const double radius = r(rng);
    const auto got = g.nearestNodes(probe, radius, 8);

    std::vector<std::pair<double, std::int32_t>> want;
    for (const RoadmapNode& n : g.nodes())
      if (n.alive) {
        const double d = (n.pos - probe).norm();
        if (d <= radius) want.emplace_back(d, n.id);
      }
    std::sort(want.begin(), want.end());
    if (want.size() > 8) want.resize(8);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].second == want[i].second);
      CHECK(got[i].first == doctest::Approx(want[i].first).epsilon(1e-12));
    }

    // unbounded-radius single nearest agrees too
    std::int32_t best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const RoadmapNode& n : g.nodes())
      if (n.alive) {
        const double d = (n.pos - probe).norm();
        if (d < best_d) {
          best_d = d;
          best = n.id;
        }
      }
    CHECK(g.nearestNode(probe) == best);
    CHECK(g.nearestNodeDistance(probe) == doctest::Approx(best_d).epsilon(1e-12));
  }

  Roadmap empty(map, p);
  CHECK(empty.nearestNode(Vec3::Zero()) == -1);
  CHECK(std::isinf(empty.nearestNodeDistance(Vec3::Zero())));
}

TEST_CASE("shortest paths match a quadratic reference Dijkstra") {
  VoxelMap map = openMap(Vec3i{28, 28, 8}, 0.25);
  RoadmapParams p;
  p.d_min = 0.4;
  p.d_max = 1.3;
  p.sample_cell = Vec3::Constant(0.6);
  Roadmap g(map, p);
  SamplingRegion whole;
  whole.box = Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()};
  g.extend(map, {whole});
  REQUIRE(g.nodeCount() > 10);

  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.nodes().size()) - 1);
  for (int q = 0; q < 30; ++q) {
    const std::int32_t from = pick(rng);
    const std::int32_t to = pick(rng);
    if (!g.node(from).alive || !g.node(to).alive) continue;
    const auto res = g.shortestPath(from, to);
    const auto dist = test::dijkstraSlow(g, {from});
    if (std::isinf(dist[to])) {
      CHECK_FALSE(res.found);
      continue;
    }
    REQUIRE(res.found);
    CHECK(res.length == doctest::Approx(dist[to]).epsilon(1e-9));
    // the reported path is a real edge walk of the reported length
    REQUIRE_FALSE(res.node_path.empty());
    CHECK(res.node_path.front() == from);
    CHECK(res.node_path.back() == to);
    double walk = 0.0;
    for (std::size_t i = 1; i < res.node_path.size(); ++i) {
      bool edge = false;
      for (const auto& [nb, len] : g.edges(res.node_path[i - 1]))
        if (nb == res.node_path[i]) {
          edge = true;
          walk += len;
        }
      CHECK(edge);
    }
    CHECK(walk == doctest::Approx(res.length).epsilon(1e-9));
  }
}

TEST_CASE("candidate assignment prefers near nodes with clear sight lines") {
  VoxelMap map = openMap(Vec3i{20, 20, 6}, 0.25);
  // carve an Unknown slab to create one frontier wall
  for (int y = 0; y < 20; ++y)
    for (int z = 0; z < 6; ++z)
      for (int x = 14; x < 20; ++x) map.setState(Vec3i{x, y, z}, VoxelState::Unknown, 2);

  RoadmapParams p;
  p.d_min = 0.4;
  p.d_max = 1.2;
  p.sample_cell = Vec3::Constant(0.5);
  p.candidate_radius = 3.0;
  p.candidate_k = 10;
  Roadmap g(map, p);
  SamplingRegion whole;
  whole.box = Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()};
  g.extend(map, {whole});
  REQUIRE(g.nodeCount() > 0);

  FrontierStore store(map);
  FrontierDetector det(map, 100000);
  FovRecord rec;
  rec.scan_id = 3;
  rec.voxel_box = Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()};
  det.detect(map, {rec}, store);
  REQUIRE_FALSE(store.frontiers().empty());

  const auto cands = g.assignCandidates(map, store);
  REQUIRE_FALSE(cands.empty());
  for (const Candidate& c : cands) {
    REQUIRE(store.has(c.frontier_id));
    const Frontier& f = store.frontier(c.frontier_id);
    const RoadmapNode& n = g.node(c.node_id);
    REQUIRE(n.alive);
    const double d = (n.pos - f.centroid).norm();
    CHECK(d <= p.candidate_radius + 1e-12);
    // no closer node also has a clear segment (first-win rule)
    const auto near = g.nearestNodes(f.centroid, p.candidate_radius, p.candidate_k);
    for (const auto& [nd, id] : near) {
      if (id == c.node_id) break;
      CHECK_FALSE(segmentFree(map, g.node(id).pos, f.centroid));
    }
  }
  // each frontier appears at most once
  std::set<std::int32_t> seen;
  for (const Candidate& c : cands) CHECK(seen.insert(c.frontier_id).second);
}
