#pragma once

#include <fsmp/types.hpp>

#include <cmath>

namespace fsmp {

// Amanatides & Woo grid traversal over a uniform grid anchored at `origin`
// with cubic cells of edge `resolution`. Walks the segment from `start` for
// `length` meters along unit `dir` and invokes
//   visit(const Vec3i& cell, double t_entry) -> bool
// for every pierced cell in order; a false return stops the walk.
template <typename Visitor>
void traverseGrid(const Vec3& origin, double resolution, const Vec3& start, const Vec3& dir,
                  double length, Visitor&& visit) {
  if (length <= 0.0) return;

  Vec3i cell;
  Vec3 t_max;    // distance at which the ray crosses the next cell boundary per axis
  Vec3 t_delta;  // distance between successive boundary crossings per axis
  Vec3i step;

  for (int a = 0; a < 3; ++a) {
    const double local = (start[a] - origin[a]) / resolution;
    cell[a] = static_cast<int>(std::floor(local));
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_max[a] = ((cell[a] + 1) * resolution + origin[a] - start[a]) / dir[a];
      t_delta[a] = resolution / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (cell[a] * resolution + origin[a] - start[a]) / dir[a];
      t_delta[a] = -resolution / dir[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }

  double t = 0.0;
  while (t < length) {
    if (!visit(cell, t)) return;
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    t = t_max[axis];
    t_max[axis] += t_delta[axis];
    cell[axis] += step[axis];
  }
}

// Parametric intersection of the ray segment [0, length] with the meter-space
// box [lo, hi]. Returns false when the segment misses the box entirely.
inline bool clipSegmentToBox(const Vec3& start, const Vec3& dir, double length, const Vec3& lo,
                             const Vec3& hi, double& t0, double& t1) {
  t0 = 0.0;
  t1 = length;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (start[a] < lo[a] || start[a] > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - start[a]) / dir[a];
    double tb = (hi[a] - start[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace fsmp
