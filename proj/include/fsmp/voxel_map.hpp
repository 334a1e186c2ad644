#pragma once

#include <fsmp/scan.hpp>
#include <fsmp/types.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fsmp {

struct JournalEntry {
  std::int32_t index;  // linear voxel index
  VoxelState old_state;
  VoxelState new_state;
  std::int32_t scan_id;
};

// Ternary occupancy grid over a bounded volume. Every state transition is
// appended to a journal; the frontier detector consumes and releases journal
// entries through an explicit cursor, so scan frequency and detector
// frequency stay decoupled.
//
// Single-writer: integrateScan/setState must not race with each other or with
// reads. Concurrent const queries between mutations are fine.
class VoxelMap {
 public:
  VoxelMap(const Vec3& origin, double resolution, const Vec3i& dims);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vec3i& dims() const { return dims_; }
  std::int64_t voxelCount() const { return static_cast<std::int64_t>(states_.size()); }

  bool inBounds(const Vec3i& p) const {
    return p.x() >= 0 && p.y() >= 0 && p.z() >= 0 && p.x() < dims_.x() && p.y() < dims_.y() &&
           p.z() < dims_.z();
  }

  std::int32_t linearIndex(const Vec3i& p) const {
    return p.x() + dims_.x() * (p.y() + dims_.y() * p.z());
  }
  Vec3i indexFromLinear(std::int32_t i) const {
    const int x = i % dims_.x();
    const int y = (i / dims_.x()) % dims_.y();
    const int z = i / (dims_.x() * dims_.y());
    return Vec3i{x, y, z};
  }

  // Voxel containing a point; may land out of bounds.
  Vec3i indexOf(const Vec3& point) const {
    const Vec3 local = (point - origin_) / resolution_;
    return Vec3i{static_cast<int>(std::floor(local.x())), static_cast<int>(std::floor(local.y())),
                 static_cast<int>(std::floor(local.z()))};
  }
  Vec3 centerOf(const Vec3i& p) const {
    return origin_ + (p.cast<double>() + Vec3::Constant(0.5)) * resolution_;
  }
  bool containsPoint(const Vec3& point) const { return inBounds(indexOf(point)); }

  Vec3 minCorner() const { return origin_; }
  Vec3 maxCorner() const { return origin_ + dims_.cast<double>() * resolution_; }

  // Throws std::out_of_range for indices outside dims; never wraps.
  VoxelState stateAt(const Vec3i& p) const;
  VoxelState stateAtLinear(std::int32_t i) const { return states_[i]; }
  VoxelState stateAtPoint(const Vec3& point) const { return stateAt(indexOf(point)); }

  // Journaling write. Throws std::out_of_range when p is outside dims.
  void setState(const Vec3i& p, VoxelState s, std::int32_t scan_id);

  // Traces every ray of the scan with exact DDA traversal: voxels pierced
  // before the hit become Free, the hit voxel becomes Occupied, misses free
  // the segment up to max range. A voxel both crossed and hit within one scan
  // resolves to Occupied. Returns the tight AABB of voxels that changed
  // state; empty when nothing changed. Rays leaving the volume are clipped.
  Aabb integrateScan(const DepthScan& scan, std::int32_t scan_id);

  int neighbors6(const Vec3i& p, std::array<Vec3i, 6>& out) const;
  int neighbors26(const Vec3i& p, std::array<Vec3i, 26>& out) const;
  std::vector<Vec3i> neighbors6(const Vec3i& p) const;
  std::vector<Vec3i> neighbors26(const Vec3i& p) const;

  // Free voxel with at least one Unknown face neighbor.
  bool isFrontierVoxel(const Vec3i& p) const;
  bool isFrontierLinear(std::int32_t i) const { return isFrontierVoxel(indexFromLinear(i)); }

  std::int64_t countOf(VoxelState s) const { return state_counts_[static_cast<int>(s)]; }

  // Journal access by absolute sequence number. journalBegin() moves forward
  // when a consumer releases entries; entries below it are gone.
  std::uint64_t journalBegin() const { return journal_base_; }
  std::uint64_t journalEnd() const { return journal_base_ + journal_.size(); }
  const JournalEntry& journalAt(std::uint64_t seq) const;
  void releaseJournal(std::uint64_t up_to);

  // Grid dump: text header (origin, resolution, dims), then one byte per
  // voxel in linear order (0 unknown, 1 free, 2 occupied).
  void writeSnapshot(std::ostream& os) const;
  static VoxelMap readSnapshot(std::istream& is);

 private:
  void applyState(std::int32_t linear, VoxelState s, std::int32_t scan_id, Aabb& changed);

  Vec3 origin_;
  double resolution_;
  Vec3i dims_;
  std::vector<VoxelState> states_;
  std::array<std::int64_t, 3> state_counts_{};
  std::vector<JournalEntry> journal_;
  std::uint64_t journal_base_ = 0;

  // per-scan scratch for the free/occupied resolution rule
  std::vector<std::int32_t> stamp_;
  std::int32_t stamp_epoch_ = 0;
};

}  // namespace fsmp
