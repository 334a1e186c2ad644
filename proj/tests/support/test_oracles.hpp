#pragma once

// Independent reference implementations used only by tests. Each solves the
// same problem as a production routine by a different construction, so a bug
// would have to be introduced twice, in two different shapes, to go unseen.

#include <fsmp/roadmap.hpp>
#include <fsmp/sensor.hpp>
#include <fsmp/types.hpp>
#include <fsmp/voxel_map.hpp>
#include <fsmp/world.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

namespace fsmp::test {

// Cells whose slab-clipped overlap with the segment exceeds min_chord,
// ordered by entry parameter. Enumerates candidate cells from the segment's
// bounding box and clips each one, instead of stepping cell to cell.
inline std::vector<std::pair<double, Vec3i>> slabTrace(const Vec3& origin, double res,
                                                       const Vec3& start, const Vec3& dir,
                                                       double length, double min_chord) {
  std::vector<std::pair<double, Vec3i>> out;
  if (length <= 0.0) return out;
  const Vec3 end = start + dir * length;
  Vec3i lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = static_cast<int>(std::floor((std::min(start[a], end[a]) - origin[a]) / res)) - 1;
    hi[a] = static_cast<int>(std::floor((std::max(start[a], end[a]) - origin[a]) / res)) + 1;
  }
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Vec3i cell{x, y, z};
        const Vec3 clo = origin + cell.cast<double>() * res;
        double t0 = 0.0, t1 = length;
        bool miss = false;
        for (int a = 0; a < 3 && !miss; ++a) {
          if (dir[a] == 0.0) {
            if (start[a] < clo[a] || start[a] > clo[a] + res) miss = true;
            continue;
          }
          double ta = (clo[a] - start[a]) / dir[a];
          double tb = (clo[a] + res - start[a]) / dir[a];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
          if (t0 > t1) miss = true;
        }
        if (!miss && t1 - t0 > min_chord) out.emplace_back(t0, cell);
      }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.x() != b.second.x()) return a.second.x() < b.second.x();
    if (a.second.y() != b.second.y()) return a.second.y() < b.second.y();
    return a.second.z() < b.second.z();
  });
  return out;
}

// 26-connected components of a voxel set by union-find over sorted members.
inline std::vector<std::vector<std::int32_t>> components26(const VoxelMap& map,
                                                           std::vector<std::int32_t> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  const std::size_t n = members.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3i p = map.indexFromLinear(members[i]);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy && !dz) continue;
          const Vec3i q = p + Vec3i{dx, dy, dz};
          if (!map.inBounds(q)) continue;
          const std::int32_t ql = map.linearIndex(q);
          const auto it = std::lower_bound(members.begin(), members.end(), ql);
          if (it == members.end() || *it != ql) continue;
          const std::size_t j = static_cast<std::size_t>(it - members.begin());
          parent[find(i)] = find(j);
        }
  }
  std::vector<std::vector<std::int32_t>> comps;
  std::vector<std::int32_t> root_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_of[r] < 0) {
      root_of[r] = static_cast<std::int32_t>(comps.size());
      comps.emplace_back();
    }
    comps[root_of[r]].push_back(members[i]);
  }
  for (auto& c : comps) std::sort(c.begin(), c.end());
  return comps;
}

// O(V^2) single-source shortest paths over the roadmap's node array, seeded
// from explicit (node, distance) sources. No heap, no early exit.
inline std::vector<double> dijkstraSlow(
    const Roadmap& g, const std::vector<std::pair<std::int32_t, double>>& sources) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = g.nodes().size();
  std::vector<double> dist(n, inf);
  std::vector<char> done(n, 0);
  for (const auto& [id, d] : sources) dist[id] = std::min(dist[id], d);
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v] && dist[v] < inf && (best == n || dist[v] < dist[best])) best = v;
    if (best == n) break;
    done[best] = 1;
    for (const auto& [w, len] : g.edges(static_cast<std::int32_t>(best)))
      dist[w] = std::min(dist[w], dist[best] + len);
  }
  return dist;
}

// First solid surface along a unit ray: slab entry tests against every
// obstacle box plus exit tests against the six enclosing walls. Independent
// of GroundTruthWorld::castRay's plane enumeration.
inline double firstHitSlabs(const GroundTruthWorld& w, const Vec3& start, const Vec3& dir) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0)
      best = std::min(best, (w.hi()[a] - start[a]) / dir[a]);
    else if (dir[a] < 0.0)
      best = std::min(best, (w.lo()[a] - start[a]) / dir[a]);
  }
  for (const ObstacleBox& b : w.boxes()) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (dir[a] == 0.0) {
        if (start[a] < b.lo[a] || start[a] > b.hi[a]) miss = true;
        continue;
      }
      double ta = (b.lo[a] - start[a]) / dir[a];
      double tb = (b.hi[a] - start[a]) / dir[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) miss = true;
    }
    if (!miss && t1 > 0.0 && t0 < best) best = std::max(t0, 0.0);
  }
  return best;
}

// Unknown voxels first pierced within [min_range, max_range) along the
// strided capture-grid directions, rays blocked by Occupied voxels and the
// map boundary. Re-derives the direction grid from the spec and walks each
// ray with the slab tracer.
inline std::int64_t gainOracle(const VoxelMap& map, const SensorSpec& spec, int stride_h,
                               int stride_v, const Vec3& pos, double yaw) {
  const CameraFrame cam = cameraFrame(yaw);
  const double W = spec.tanHalfH();
  const double H = spec.tanHalfV();
  std::set<std::int32_t> seen;
  for (int j = 0; j < spec.rays_v; j += stride_v) {
    const double b = -H + (2.0 * H) * j / (spec.rays_v - 1);
    for (int i = 0; i < spec.rays_h; i += stride_h) {
      const double a = -W + (2.0 * W) * i / (spec.rays_h - 1);
      const Vec3 dir = (cam.forward + a * cam.left + b * cam.up).normalized();
      for (const auto& [t, cell] :
           slabTrace(map.origin(), map.resolution(), pos, dir, spec.max_range, 1e-12)) {
        if (!map.inBounds(cell)) break;
        const VoxelState s = map.stateAt(cell);
        if (s == VoxelState::Occupied) break;
        if (s == VoxelState::Unknown && t >= spec.min_range) seen.insert(map.linearIndex(cell));
      }
    }
  }
  return static_cast<std::int64_t>(seen.size());
}

}  // namespace fsmp::test
