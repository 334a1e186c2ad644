#include <fsmp/roadmap.hpp>

#include <fsmp/raycast.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <queue>

namespace fsmp {

bool segmentFree(const VoxelMap& map, const Vec3& a, const Vec3& b) {
  // Exact grid traversal rather than point sampling: no voxel the segment
  // pierces can slip between samples. The endpoints are ordered canonically
  // first so the answer is bit-identical no matter which direction a caller
  // asks about.
  const bool a_first = a.x() != b.x()   ? a.x() < b.x()
                       : a.y() != b.y() ? a.y() < b.y()
                                        : a.z() < b.z();
  const Vec3& s = a_first ? a : b;
  const Vec3& e = a_first ? b : a;
  const auto freeVoxel = [&](const Vec3i& v) {
    return map.inBounds(v) && map.stateAtLinear(map.linearIndex(v)) == VoxelState::Free;
  };
  if (!freeVoxel(map.indexOf(s)) || !freeVoxel(map.indexOf(e))) return false;
  const Vec3 d = e - s;
  const double len = d.norm();
  if (len == 0.0) return true;
  bool ok = true;
  traverseGrid(map.origin(), map.resolution(), s, d / len, len, [&](const Vec3i& cell, double) {
    ok = freeVoxel(cell);
    return ok;
  });
  return ok;
}

Roadmap::Roadmap(const VoxelMap& map, const RoadmapParams& params)
    : params_(params), cell_size_(params.d_max) {
  (void)map;
  if (!(params_.d_min > 0.0 && params_.d_min <= params_.d_max))
    throw std::invalid_argument("roadmap: require 0 < d_min <= d_max");
  if (!(params_.sample_cell.minCoeff() > 0.0))
    throw std::invalid_argument("roadmap: sample cell lengths must be positive");
}

std::int64_t Roadmap::cellKey(const Vec3& p) const {
  const auto c = [&](double x) { return static_cast<std::int64_t>(std::floor(x / cell_size_)); };
  // 21 bits per axis, offset to stay positive
  const std::int64_t ox = c(p.x()) + (1 << 20), oy = c(p.y()) + (1 << 20),
                     oz = c(p.z()) + (1 << 20);
  return (ox << 42) | (oy << 21) | oz;
}

template <typename Fn>
void Roadmap::forEachNodeNear(const Vec3& p, double radius, Fn&& fn) const {
  const int r = static_cast<int>(std::ceil(radius / cell_size_));
  const auto base = [&](double x) {
    return static_cast<std::int64_t>(std::floor(x / cell_size_));
  };
  const std::int64_t bx = base(p.x()), by = base(p.y()), bz = base(p.z());
  for (std::int64_t dz = -r; dz <= r; ++dz)
    for (std::int64_t dy = -r; dy <= r; ++dy)
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        const std::int64_t key = (((bx + dx) + (1 << 20)) << 42) |
                                 (((by + dy) + (1 << 20)) << 21) | ((bz + dz) + (1 << 20));
        const auto it = grid_.find(key);
        if (it == grid_.end()) continue;
        for (const std::int32_t id : it->second)
          if (nodes_[id].alive) fn(id);
      }
}

std::int32_t Roadmap::addNode(const Vec3& pos) {
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(RoadmapNode{id, pos, true});
  adj_.emplace_back();
  grid_[cellKey(pos)].push_back(id);
  ++alive_count_;
  return id;
}

void Roadmap::removeNode(std::int32_t id) {
  RoadmapNode& n = nodes_[id];
  if (!n.alive) return;
  for (const auto& [nbr, len] : adj_[id]) {
    auto& back = adj_[nbr];
    back.erase(std::remove_if(back.begin(), back.end(),
                              [id](const auto& e) { return e.first == id; }),
               back.end());
    --edge_count_;
  }
  adj_[id].clear();
  auto& cell = grid_[cellKey(n.pos)];
  cell.erase(std::remove(cell.begin(), cell.end(), id), cell.end());
  n.alive = false;
  --alive_count_;
}

std::vector<SamplingRegion> Roadmap::determineRegions(const std::vector<FovRecord>& fovs,
                                                      const std::vector<const Frontier*>& fresh) {
  // Keep FOVs whose box touches a new frontier's box.
  std::vector<const FovRecord*> kept;
  for (const FovRecord& f : fovs) {
    if (f.voxel_box.empty()) continue;
    for (const Frontier* fr : fresh)
      if (f.voxel_box.intersects(fr->box)) {
        kept.push_back(&f);
        break;
      }
  }
  // Transitive merge of overlapping kept boxes (union-find).
  std::vector<int> parent(kept.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j)
      if (kept[i]->voxel_box.intersects(kept[j]->voxel_box)) {
        const int a = find(static_cast<int>(i)), b = find(static_cast<int>(j));
        if (a != b) parent[b] = a;
      }

  std::vector<SamplingRegion> regions;
  std::vector<int> region_of(kept.size(), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const int root = find(static_cast<int>(i));
    if (region_of[root] < 0) {
      region_of[root] = static_cast<int>(regions.size());
      regions.emplace_back();
    }
    SamplingRegion& r = regions[region_of[root]];
    r.box.expand(kept[i]->voxel_box);
    r.scan_ids.push_back(kept[i]->scan_id);
  }
  return regions;
}

std::vector<Vec3> Roadmap::sukharevSamples(const Vec3& lo, const Vec3& hi, const Vec3& l) {
  std::vector<Vec3> out;
  Vec3i counts;
  for (int a = 0; a < 3; ++a) {
    const double span = hi[a] - lo[a];
    if (span <= 0.0) return out;
    counts[a] = std::max(1, static_cast<int>(std::ceil(span / l[a] - 1e-12)));
  }
  for (int k = 0; k < counts.z(); ++k)
    for (int j = 0; j < counts.y(); ++j)
      for (int i = 0; i < counts.x(); ++i) {
        const Vec3i c{i, j, k};
        Vec3 p;
        for (int a = 0; a < 3; ++a) {
          const double c0 = lo[a] + c[a] * l[a];
          const double c1 = std::min(c0 + l[a], hi[a]);  // trailing cells clipped
          p[a] = 0.5 * (c0 + c1);
        }
        out.push_back(p);
      }
  return out;
}

std::vector<std::int32_t> Roadmap::extend(const VoxelMap& map,
                                          const std::vector<SamplingRegion>& regions) {
  std::vector<std::int32_t> added;
  for (const SamplingRegion& region : regions) {
    if (region.box.empty()) continue;
    Vec3 lo = map.origin() + region.box.min.cast<double>() * map.resolution();
    Vec3 hi = map.origin() + (region.box.max + Vec3i::Ones()).cast<double>() * map.resolution();
    lo.z() = std::max(lo.z(), params_.z_min);
    hi.z() = std::min(hi.z(), params_.z_max);
    for (const Vec3& raw : sukharevSamples(lo, hi, params_.sample_cell)) {
      // Cell midpoints land exactly on voxel face planes whenever the sample
      // cell is a multiple of half the resolution; keep node positions off
      // every face so point-to-voxel assignment is never rounding-ambiguous.
      const Vec3 s = snapOffFaces(raw, map.resolution());
      const Vec3i v = map.indexOf(s);
      if (!map.inBounds(v) || map.stateAtLinear(map.linearIndex(v)) != VoxelState::Free)
        continue;                                        // sample must be in Free space
      if (nearestNodeDistance(s) < params_.d_min) continue;  // spacing lower bound
      const std::int32_t id = addNode(s);
      // connect to every prior node within d_max through free space
      std::vector<std::pair<double, std::int32_t>> near =
          nearestNodes(s, params_.d_max, std::numeric_limits<int>::max());
      for (const auto& [dist, nid] : near) {
        if (nid == id) continue;
        if (!segmentFree(map, s, nodes_[nid].pos)) continue;
        adj_[id].emplace_back(nid, dist);
        adj_[nid].emplace_back(id, dist);
        ++edge_count_;
      }
      added.push_back(id);
    }
  }
  return added;
}

std::vector<std::int32_t> Roadmap::prune(const VoxelMap& map) {
  std::vector<std::int32_t> removed;
  for (const RoadmapNode& n : nodes_) {
    if (!n.alive) continue;
    const Vec3i v = map.indexOf(n.pos);
    if (!map.inBounds(v) || map.stateAtLinear(map.linearIndex(v)) != VoxelState::Free)
      removed.push_back(n.id);
  }
  for (const std::int32_t id : removed) removeNode(id);

  for (std::int32_t id = 0; id < static_cast<std::int32_t>(nodes_.size()); ++id) {
    if (!nodes_[id].alive) continue;
    auto& edges = adj_[id];
    for (std::size_t k = 0; k < edges.size();) {
      const std::int32_t nbr = edges[k].first;
      if (nbr > id) {  // handle each undirected edge once
        ++k;
        continue;
      }
      if (segmentFree(map, nodes_[id].pos, nodes_[nbr].pos)) {
        ++k;
        continue;
      }
      auto& back = adj_[nbr];
      back.erase(std::remove_if(back.begin(), back.end(),
                                [id](const auto& e) { return e.first == id; }),
                 back.end());
      edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(k));
      --edge_count_;
    }
  }
  return removed;
}

std::vector<Candidate> Roadmap::assignCandidates(const VoxelMap& map,
                                                 const FrontierStore& store) const {
  std::vector<Candidate> out;
  for (const auto& [fid, frontier] : store.frontiers()) {
    // The centroid of a bent cluster can fall inside an obstacle, so when no
    // node sees it, probe a bounded subsample of the member voxels instead.
    std::vector<Vec3> probes{frontier.centroid};
    const std::size_t step = std::max<std::size_t>(1, frontier.members.size() / 8);
    for (std::size_t k = 0; k < frontier.members.size(); k += step)
      probes.push_back(map.centerOf(map.indexFromLinear(frontier.members[k])));
    bool assigned = false;
    for (const Vec3& probe : probes) {
      const std::vector<std::pair<double, std::int32_t>> near =
          nearestNodes(probe, params_.candidate_radius, params_.candidate_k);
      for (const auto& [dist, nid] : near) {
        if (segmentFree(map, nodes_[nid].pos, probe)) {
          out.push_back(Candidate{nid, fid});
          assigned = true;
          break;
        }
      }
      if (assigned) break;
    }
  }
  return out;
}

Roadmap::PathResult Roadmap::shortestPath(std::int32_t from, std::int32_t to) const {
  PathResult res;
  if (from < 0 || to < 0 || from >= static_cast<std::int32_t>(nodes_.size()) ||
      to >= static_cast<std::int32_t>(nodes_.size()) || !nodes_[from].alive || !nodes_[to].alive)
    return res;
  if (from == to) {
    res.found = true;
    res.node_path = {from};
    return res;
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(nodes_.size(), inf);
  std::vector<std::int32_t> parent(nodes_.size(), -1);
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  dist[from] = 0.0;
  heap.emplace(0.0, from);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (v == to) break;
    for (const auto& [w, len] : adj_[v]) {
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        parent[w] = v;
        heap.emplace(nd, w);
      }
    }
  }
  if (dist[to] == inf) return res;
  res.found = true;
  res.length = dist[to];
  for (std::int32_t v = to; v != -1; v = parent[v]) res.node_path.push_back(v);
  std::reverse(res.node_path.begin(), res.node_path.end());
  return res;
}

std::vector<std::pair<double, std::int32_t>> Roadmap::nearestNodes(const Vec3& p, double radius,
                                                                   int max_count) const {
  std::vector<std::pair<double, std::int32_t>> found;
  forEachNodeNear(p, radius, [&](std::int32_t id) {
    const double d = (nodes_[id].pos - p).norm();
    if (d <= radius) found.emplace_back(d, id);
  });
  std::sort(found.begin(), found.end());
  if (static_cast<int>(found.size()) > max_count) found.resize(max_count);
  return found;
}

std::int32_t Roadmap::nearestNode(const Vec3& p) const {
  std::int32_t best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const RoadmapNode& n : nodes_) {
    if (!n.alive) continue;
    const double d = (n.pos - p).norm();
    if (d < best_d || (d == best_d && n.id < best)) {
      best_d = d;
      best = n.id;
    }
  }
  return best;
}

double Roadmap::nearestNodeDistance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  bool found_near = false;
  forEachNodeNear(p, params_.d_min, [&](std::int32_t id) {
    best = std::min(best, (nodes_[id].pos - p).norm());
    found_near = true;
  });
  if (found_near) return best;
  const std::int32_t id = nearestNode(p);
  return id < 0 ? best : (nodes_[id].pos - p).norm();
}

Roadmap::Violations Roadmap::validate(const VoxelMap& map) const {
  Violations v;
  for (const RoadmapNode& n : nodes_) {
    if (!n.alive) continue;
    const Vec3i idx = map.indexOf(n.pos);
    if (!map.inBounds(idx) || map.stateAtLinear(map.linearIndex(idx)) != VoxelState::Free)
      ++v.node_not_free;
    // pairwise spacing, each unordered pair once
    forEachNodeNear(n.pos, params_.d_min, [&](std::int32_t other) {
      if (other <= n.id) return;
      if ((nodes_[other].pos - n.pos).norm() < params_.d_min) ++v.pair_too_close;
    });
    for (const auto& [nbr, len] : adj_[n.id]) {
      if (!nodes_[nbr].alive) {
        ++v.asymmetric;
        continue;
      }
      const auto& back = adj_[nbr];
      const bool mirrored = std::any_of(back.begin(), back.end(), [&](const auto& e) {
        return e.first == n.id && e.second == len;
      });
      if (!mirrored) ++v.asymmetric;
      if (nbr > n.id) {
        if (len < params_.d_min || len > params_.d_max) ++v.edge_length;
        if (!segmentFree(map, n.pos, nodes_[nbr].pos)) ++v.edge_collision;
      }
    }
  }
  return v;
}

}  // namespace fsmp
