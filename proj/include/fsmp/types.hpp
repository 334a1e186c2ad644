#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>

namespace fsmp {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

// Coordinates that coincide with a voxel face plane make point-to-voxel
// assignment rounding-ambiguous, and the "same" coordinate computed along two
// different arithmetic routes can differ in the last bit. Sampled poses are
// therefore snapped to the lattice offset half a sub-step from every face,
// (2k+1)*res/32 per axis: no snapped coordinate lies on any face plane, and
// mathematically equal coordinates become bit-equal, so segments between
// snapped points that share a coordinate are exactly axis-aligned. Ties at the
// midpoint round away from zero — upward over the positive coordinate range
// maps occupy, matching the half-open voxel convention.
inline double snapOffFaces(double x, double resolution) {
  const double h = resolution / 32.0;
  const double k = std::round(x / (2.0 * h) - 0.5);
  return (2.0 * k + 1.0) * h;
}

inline Vec3 snapOffFaces(const Vec3& p, double resolution) {
  return Vec3(snapOffFaces(p.x(), resolution), snapOffFaces(p.y(), resolution),
              snapOffFaces(p.z(), resolution));
}

enum class VoxelState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

inline const char* toString(VoxelState s) {
  switch (s) {
    case VoxelState::Unknown: return "unknown";
    case VoxelState::Free: return "free";
    case VoxelState::Occupied: return "occupied";
  }
  return "?";
}

// Inclusive axis-aligned box over voxel indices. Default-constructed box is empty.
struct Aabb {
  Vec3i min{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
            std::numeric_limits<int>::max()};
  Vec3i max{std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
            std::numeric_limits<int>::min()};

  Aabb() = default;
  Aabb(const Vec3i& lo, const Vec3i& hi) : min(lo), max(hi) {}

  bool empty() const {
    return min.x() > max.x() || min.y() > max.y() || min.z() > max.z();
  }

  void expand(const Vec3i& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  void expand(const Aabb& o) {
    if (o.empty()) return;
    expand(o.min);
    expand(o.max);
  }

  bool contains(const Vec3i& p) const {
    return !empty() && (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  bool intersects(const Aabb& o) const {
    if (empty() || o.empty()) return false;
    return (min.array() <= o.max.array()).all() && (max.array() >= o.min.array()).all();
  }

  static Aabb merged(const Aabb& a, const Aabb& b) {
    Aabb r = a;
    r.expand(b);
    return r;
  }

  Aabb intersection(const Aabb& o) const {
    if (!intersects(o)) return Aabb{};
    return Aabb{min.cwiseMax(o.min), max.cwiseMin(o.max)};
  }

  Aabb inflated(int r) const {
    if (empty()) return *this;
    return Aabb{min - Vec3i::Constant(r), max + Vec3i::Constant(r)};
  }

  Vec3i extent() const {
    if (empty()) return Vec3i::Zero();
    return max - min + Vec3i::Ones();
  }

  std::int64_t volume() const {
    const Vec3i e = extent();
    return static_cast<std::int64_t>(e.x()) * e.y() * e.z();
  }

  bool operator==(const Aabb& o) const {
    if (empty() && o.empty()) return true;
    return min == o.min && max == o.max;
  }
  bool operator!=(const Aabb& o) const { return !(*this == o); }
};

}  // namespace fsmp
