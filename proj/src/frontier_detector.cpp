#include <fsmp/frontier_detector.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace fsmp {

FrontierStore::FrontierStore(const VoxelMap& map) {
  owner_.assign(static_cast<std::size_t>(map.voxelCount()), -1);
}

std::int32_t FrontierStore::install(std::vector<std::int32_t> members, const VoxelMap& map) {
  if (members.empty()) throw std::invalid_argument("frontier install: empty member set");
  Frontier f;
  f.id = next_id_++;
  Vec3 sum = Vec3::Zero();
  for (const std::int32_t v : members) {
    if (owner_[v] >= 0) throw std::logic_error("frontier install: voxel already owned");
    owner_[v] = f.id;
    const Vec3i p = map.indexFromLinear(v);
    f.box.expand(p);
    sum += map.centerOf(p);
  }
  f.centroid = sum / static_cast<double>(members.size());
  voxel_count_ += members.size();
  f.members = std::move(members);
  const std::int32_t id = f.id;
  frontiers_.emplace(id, std::move(f));
  return id;
}

std::vector<std::int32_t> FrontierStore::erase(std::int32_t id) {
  auto it = frontiers_.find(id);
  if (it == frontiers_.end()) throw std::invalid_argument("frontier erase: unknown id");
  std::vector<std::int32_t> members = std::move(it->second.members);
  for (const std::int32_t v : members) owner_[v] = -1;
  voxel_count_ -= members.size();
  frontiers_.erase(it);
  return members;
}

void FrontierStore::clear() {
  for (auto& [id, f] : frontiers_)
    for (const std::int32_t v : f.members) owner_[v] = -1;
  frontiers_.clear();
  voxel_count_ = 0;
}

std::vector<std::int32_t> FrontierStore::allFrontierVoxels() const {
  std::vector<std::int32_t> all;
  all.reserve(voxel_count_);
  for (const auto& [id, f] : frontiers_) all.insert(all.end(), f.members.begin(), f.members.end());
  std::sort(all.begin(), all.end());
  return all;
}

FrontierDetector::FrontierDetector(const VoxelMap& map, int n_max) : n_max_(n_max) {
  if (n_max < 1) throw std::invalid_argument("detector: n_max must be positive");
  const std::size_t n = static_cast<std::size_t>(map.voxelCount());
  exam_stamp_.assign(n, 0);
  exam_result_.assign(n, 0);
  exam_count_.assign(n, 0);
  change_stamp_.assign(n, 0);
  bfs_stamp_.assign(n, 0);
  const Vec3i d = map.dims();
  tile_dims_ = Vec3i{(d.x() + kTileEdge - 1) / kTileEdge, (d.y() + kTileEdge - 1) / kTileEdge,
                     (d.z() + kTileEdge - 1) / kTileEdge};
  tile_stamp_.assign(
      static_cast<std::size_t>(tile_dims_.x()) * tile_dims_.y() * tile_dims_.z(), 0);
}

void FrontierDetector::beginRound(const VoxelMap& map) {
  if (exam_stamp_.size() != static_cast<std::size_t>(map.voxelCount()))
    throw std::invalid_argument("detector: map size differs from construction");
  if (instrumented_) {
    for (const std::int32_t v : exam_touched_) exam_count_[v] = 0;
    exam_touched_.clear();
  }
  scanned_round_ = 0;
  if (round_ == std::numeric_limits<std::int32_t>::max()) {
    std::fill(exam_stamp_.begin(), exam_stamp_.end(), 0);
    std::fill(change_stamp_.begin(), change_stamp_.end(), 0);
    std::fill(bfs_stamp_.begin(), bfs_stamp_.end(), 0);
    std::fill(tile_stamp_.begin(), tile_stamp_.end(), 0);
    round_ = 0;
  }
  ++round_;
}

bool FrontierDetector::examine(const VoxelMap& map, std::int32_t v) {
  if (exam_stamp_[v] == round_) return exam_result_[v] != 0;
  exam_stamp_[v] = round_;
  ++scanned_round_;
  if (instrumented_) {
    ++exam_count_[v];
    exam_touched_.push_back(v);
  }
  const bool r = map.isFrontierLinear(v);
  exam_result_[v] = r ? 1 : 0;
  return r;
}

DetectionReport FrontierDetector::detect(VoxelMap& map, const std::vector<FovRecord>& fovs,
                                         FrontierStore& store) {
  const auto t_start = std::chrono::steady_clock::now();

  std::int64_t prev = last_scan_id_;
  for (const FovRecord& f : fovs) {
    if (f.scan_id <= prev)
      throw std::invalid_argument("detect: FOV records out of chronological order");
    prev = f.scan_id;
  }
  last_scan_id_ = prev;

  beginRound(map);
  DetectionReport rep;
  for (const FovRecord& f : fovs)
    if (!f.voxel_box.empty()) rep.roi_voxels += f.voxel_box.volume();

  // One pass over the pending journal window: collect the distinct changed
  // voxels and invalidate stale clusters. A cluster dies when a member's
  // state changed, or when a voxel that was Unknown became known next to it
  // (a member may have lost its last Unknown face neighbor; membership alone
  // — the literal reading — would leave such stale members undetected).
  // Displaced members go to the recheck list, mirroring the deleteSet of the
  // four-phase scheme.
  std::vector<std::int32_t> changed;
  std::vector<std::int32_t> recheck;
  const auto invalidate = [&](std::int32_t id) {
    std::vector<std::int32_t> members = store.erase(id);
    rep.removed_ids.push_back(id);
    recheck.insert(recheck.end(), members.begin(), members.end());
  };
  const Vec3i jd = map.dims();
  const std::int32_t jdx = jd.x(), jdxy = jd.x() * jd.y();
  const std::uint64_t j_begin = map.journalBegin();
  const std::uint64_t j_end = map.journalEnd();
  for (std::uint64_t s = j_begin; s != j_end; ++s) {
    const JournalEntry& e = map.journalAt(s);
    if (change_stamp_[e.index] != round_) {
      change_stamp_[e.index] = round_;
      changed.push_back(e.index);
    }
    const std::int32_t fu = store.ownerOf(e.index);
    if (fu >= 0) invalidate(fu);
    if (e.old_state == VoxelState::Unknown) {
      const Vec3i p = map.indexFromLinear(e.index);
      const auto touch = [&](std::int32_t w) {
        const std::int32_t fv = store.ownerOf(w);
        if (fv >= 0) invalidate(fv);
      };
      if (p.x() > 0) touch(e.index - 1);
      if (p.x() + 1 < jd.x()) touch(e.index + 1);
      if (p.y() > 0) touch(e.index - jdx);
      if (p.y() + 1 < jd.y()) touch(e.index + jdx);
      if (p.z() > 0) touch(e.index - jdxy);
      if (p.z() + 1 < jd.z()) touch(e.index + jdxy);
    }
  }
  rep.journal_consumed = j_end;
  map.releaseJournal(j_end);

  // ROI scan. Each FOV box is carved into fixed grid-aligned tiles and only
  // tiles this round's journal touched are rescanned; voxels in untouched
  // tiles cannot have changed frontier status. Seeds are unowned frontier
  // voxels; each voxel is examined at most once per round via the memo in
  // examine().
  std::vector<std::int32_t> seeds;
  const auto consider = [&](std::int32_t v) {
    if (exam_stamp_[v] == round_) return;
    if (examine(map, v) && store.ownerOf(v) < 0) seeds.push_back(v);
  };

  const auto tileAt = [&](int tx, int ty, int tz) -> std::int32_t& {
    return tile_stamp_[(static_cast<std::size_t>(tz) * tile_dims_.y() + ty) * tile_dims_.x() + tx];
  };
  for (const std::int32_t u : changed) {
    const Vec3i p = map.indexFromLinear(u);
    tileAt(p.x() / kTileEdge, p.y() / kTileEdge, p.z() / kTileEdge) = round_;
  }

  const Vec3i dims = map.dims();
  for (const FovRecord& f : fovs) {
    const Aabb& box = f.voxel_box;
    if (box.empty()) continue;
    for (int tz = box.min.z() / kTileEdge; tz <= box.max.z() / kTileEdge; ++tz)
      for (int ty = box.min.y() / kTileEdge; ty <= box.max.y() / kTileEdge; ++ty)
        for (int tx = box.min.x() / kTileEdge; tx <= box.max.x() / kTileEdge; ++tx) {
          if (tileAt(tx, ty, tz) != round_) continue;
          const int x0 = std::max(box.min.x(), tx * kTileEdge);
          const int y0 = std::max(box.min.y(), ty * kTileEdge);
          const int z0 = std::max(box.min.z(), tz * kTileEdge);
          const int x1 = std::min(box.max.x(), tx * kTileEdge + kTileEdge - 1);
          const int y1 = std::min(box.max.y(), ty * kTileEdge + kTileEdge - 1);
          const int z1 = std::min(box.max.z(), tz * kTileEdge + kTileEdge - 1);
          for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y) {
              std::int32_t v = (z * dims.y() + y) * dims.x() + x0;
              for (int x = x0; x <= x1; ++x, ++v) consider(v);
            }
        }
  }

  // Changed voxels and their face neighbors, regardless of box membership:
  // keeps the detector exact under direct map edits that land on box faces.
  for (const std::int32_t u : changed) {
    consider(u);
    const Vec3i p = map.indexFromLinear(u);
    if (p.x() > 0) consider(u - 1);
    if (p.x() + 1 < jd.x()) consider(u + 1);
    if (p.y() > 0) consider(u - jdx);
    if (p.y() + 1 < jd.y()) consider(u + jdx);
    if (p.z() > 0) consider(u - jdxy);
    if (p.z() + 1 < jd.z()) consider(u + jdxy);
  }

  // Displaced members that were not re-absorbed above.
  for (const std::int32_t v : recheck) consider(v);

  // Cluster extraction: BFS over 26-adjacency from each surviving seed.
  // Interior voxels expand by precomputed linear offsets; only voxels on the
  // outermost grid layer need the bounds-checked neighbor walk.
  std::int32_t off26[26];
  {
    int k = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx || dy || dz) off26[k++] = dx + dims.x() * (dy + dims.y() * dz);
  }
  std::array<Vec3i, 26> nb26;
  std::vector<std::int32_t> queue;
  const auto expand = [&](std::int32_t w) {
    if (bfs_stamp_[w] == round_) return;
    bfs_stamp_[w] = round_;
    if (store.ownerOf(w) >= 0) return;
    if (!examine(map, w)) return;
    queue.push_back(w);
  };
  for (const std::int32_t s : seeds) {
    if (store.ownerOf(s) >= 0 || bfs_stamp_[s] == round_) continue;
    queue.clear();
    queue.push_back(s);
    bfs_stamp_[s] = round_;
    std::vector<std::int32_t> cluster;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::int32_t v = queue[qi];
      cluster.push_back(v);
      const Vec3i p = map.indexFromLinear(v);
      if (p.x() > 0 && p.y() > 0 && p.z() > 0 && p.x() + 1 < dims.x() && p.y() + 1 < dims.y() &&
          p.z() + 1 < dims.z()) {
        for (const std::int32_t d : off26) expand(v + d);
      } else {
        const int n = map.neighbors26(p, nb26);
        for (int k = 0; k < n; ++k) expand(map.linearIndex(nb26[k]));
      }
    }
    for (auto& part : splitCluster(map, std::move(cluster), n_max_))
      rep.new_ids.push_back(store.install(std::move(part), map));
  }

  rep.scanned_voxels = scanned_round_;
  if (instrumented_)
    for (const std::int32_t v : exam_touched_)
      rep.max_exams_per_voxel = std::max<std::int64_t>(rep.max_exams_per_voxel, exam_count_[v]);
  rep.elapsed_us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t_start)
          .count();
  return rep;
}

std::vector<std::int32_t> FrontierDetector::extractFrontier(const VoxelMap& map, const Vec3i& seed,
                                                            const FrontierStore& store) {
  if (!map.inBounds(seed)) throw std::invalid_argument("extract: seed out of bounds");
  const std::int32_t s = map.linearIndex(seed);
  if (!map.isFrontierVoxel(seed) || store.ownerOf(s) >= 0)
    throw std::invalid_argument("extract: seed must be an unowned frontier voxel");

  std::unordered_set<std::int32_t> visited{s};
  std::vector<std::int32_t> queue{s};
  std::vector<std::int32_t> members;
  std::array<Vec3i, 26> nb26;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::int32_t v = queue[qi];
    members.push_back(v);
    const int n = map.neighbors26(map.indexFromLinear(v), nb26);
    for (int k = 0; k < n; ++k) {
      const std::int32_t w = map.linearIndex(nb26[k]);
      if (visited.count(w)) continue;
      visited.insert(w);
      if (store.ownerOf(w) >= 0) continue;
      if (!map.isFrontierLinear(w)) continue;
      queue.push_back(w);
    }
  }
  std::sort(members.begin(), members.end());
  return members;
}

std::vector<std::vector<std::int32_t>> FrontierDetector::splitCluster(
    const VoxelMap& map, std::vector<std::int32_t> members, int n_max) {
  std::vector<std::vector<std::int32_t>> out;
  std::vector<std::vector<std::int32_t>> stack;
  stack.push_back(std::move(members));

  while (!stack.empty()) {
    std::vector<std::int32_t> cur = std::move(stack.back());
    stack.pop_back();
    if (static_cast<int>(cur.size()) <= n_max) {
      std::sort(cur.begin(), cur.end());
      out.push_back(std::move(cur));
      continue;
    }

    Aabb box;
    for (const std::int32_t v : cur) box.expand(map.indexFromLinear(v));
    const Vec3i e = box.extent();
    int axis = 0;
    if (e.y() > e[axis]) axis = 1;
    if (e.z() > e[axis]) axis = 2;
    // The box is tight, so voxels sit on both extreme planes of the longest
    // axis and the midpoint cut leaves neither half empty.
    const int mid = (box.min[axis] + box.max[axis]) / 2;

    std::vector<std::int32_t> lo, hi;
    for (const std::int32_t v : cur)
      (map.indexFromLinear(v)[axis] <= mid ? lo : hi).push_back(v);
    stack.push_back(std::move(lo));
    stack.push_back(std::move(hi));
  }
  return out;
}

}  // namespace fsmp
