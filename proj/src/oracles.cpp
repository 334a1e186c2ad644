#include <fsmp/frontier_detector.hpp>
#include <fsmp/oracles.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>
#include <queue>
#include <unordered_set>

namespace fsmp {

namespace {
double sinceUs(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

OracleReport naiveDetect(const VoxelMap& map) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport rep;
  const std::int32_t n = static_cast<std::int32_t>(map.voxelCount());
  for (std::int32_t v = 0; v < n; ++v)
    if (map.isFrontierLinear(v)) rep.frontier_voxels.push_back(v);
  rep.scanned_voxels = n;
  rep.elapsed_us = sinceUs(t0);
  return rep;
}

Aabb mergedChangeBox(const VoxelMap& map, const std::vector<Aabb>& change_boxes) {
  Aabb merged;
  for (const Aabb& b : change_boxes) merged.expand(b);
  if (merged.empty()) return merged;
  merged = merged.inflated(1);
  return merged.intersection(Aabb{Vec3i::Zero(), map.dims() - Vec3i::Ones()});
}

AabbRgDetector::AabbRgDetector(const VoxelMap& map, int split_limit) : split_limit_(split_limit) {
  flag_.assign(static_cast<std::size_t>(map.voxelCount()), 0);
  owner_.assign(static_cast<std::size_t>(map.voxelCount()), -1);
}

OracleReport AabbRgDetector::detect(const VoxelMap& map, const std::vector<Aabb>& change_boxes) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport rep;
  const Aabb box = mergedChangeBox(map, change_boxes);
  if (box.empty()) {
    rep.elapsed_us = sinceUs(t0);
    return rep;
  }
  rep.scanned_voxels = box.volume();

  // Relabel the whole box against the persistent flags; frontier voxels it
  // contains seed the regrowth.
  std::vector<std::int32_t> seeds;
  for (int z = box.min.z(); z <= box.max.z(); ++z)
    for (int y = box.min.y(); y <= box.max.y(); ++y)
      for (int x = box.min.x(); x <= box.max.x(); ++x) {
        const std::int32_t v = map.linearIndex(Vec3i{x, y, z});
        const bool now = map.isFrontierLinear(v);
        if (now) seeds.push_back(v);
        flag_[v] = now ? 1 : 0;
      }

  // Every stored cluster whose bounds touch the box is rebuilt from scratch;
  // its members outside the box keep their flag and reseed the growth, so a
  // cluster straddling the box edge reassembles with its outside part.
  std::vector<std::int32_t> dead;
  for (const auto& [id, c] : clusters_)
    if (c.box.intersects(box)) dead.push_back(id);
  for (const std::int32_t id : dead) {
    for (const std::int32_t m : clusters_[id].members) {
      owner_[m] = -1;
      if (flag_[m] && !box.contains(map.indexFromLinear(m))) seeds.push_back(m);
    }
    clusters_.erase(id);
  }
  std::sort(seeds.begin(), seeds.end());

  // Region growing over unclaimed frontier voxels, oversized components cut
  // at the longest-axis median until they fit the split limit, then each part
  // installed with its centroid and bounds.
  std::array<Vec3i, 26> nb26;
  std::vector<std::vector<std::int32_t>> parts;
  for (const std::int32_t s : seeds) {
    if (!flag_[s] || owner_[s] != -1) continue;
    std::vector<std::int32_t> comp{s};
    owner_[s] = -2;
    for (std::size_t qi = 0; qi < comp.size(); ++qi) {
      const int n = map.neighbors26(map.indexFromLinear(comp[qi]), nb26);
      for (int k = 0; k < n; ++k) {
        const std::int32_t w = map.linearIndex(nb26[k]);
        if (flag_[w] && owner_[w] == -1) {
          owner_[w] = -2;
          comp.push_back(w);
        }
      }
    }
    for (std::vector<std::int32_t>& part : FrontierDetector::splitCluster(map, std::move(comp),
                                                                        split_limit_))
      parts.push_back(std::move(part));
  }
  for (std::vector<std::int32_t>& part : parts) {
    std::sort(part.begin(), part.end());
    Cluster c;
    c.members = std::move(part);
    Vec3 sum = Vec3::Zero();
    for (const std::int32_t m : c.members) {
      c.box.expand(map.indexFromLinear(m));
      sum += map.centerOf(map.indexFromLinear(m));
    }
    c.centroid = sum / static_cast<double>(c.members.size());
    const std::int32_t id = next_id_++;
    for (const std::int32_t m : c.members) owner_[m] = id;
    clusters_.emplace(id, std::move(c));
  }
  rep.elapsed_us = sinceUs(t0);
  return rep;
}

std::vector<std::int32_t> AabbRgDetector::frontierVoxels() const {
  std::vector<std::int32_t> all;
  for (const auto& [id, c] : clusters_) all.insert(all.end(), c.members.begin(), c.members.end());
  std::sort(all.begin(), all.end());
  return all;
}

AabbWfdDetector::AabbWfdDetector(const VoxelMap& map) { (void)map; }

OracleReport AabbWfdDetector::detect(const VoxelMap& map, const std::vector<Aabb>& change_boxes,
                                     const Vec3& robot_pos) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport rep;
  const Aabb box = mergedChangeBox(map, change_boxes);
  if (box.empty()) {
    rep.elapsed_us = sinceUs(t0);
    return rep;
  }

  const auto isFree = [&](std::int32_t v) {
    return map.stateAtLinear(v) == VoxelState::Free;
  };

  // Previous members inside the box are forgotten and rediscovered by the
  // wave; members outside the box are untouched.
  std::vector<std::int32_t> old_inside;
  for (const std::int32_t v : stored_)
    if (box.contains(map.indexFromLinear(v))) old_inside.push_back(v);

  // Seeds: robot voxel, Free voxels on the box faces (free space continues
  // outside), and the old members (known Free when stored).
  std::vector<std::int32_t> seeds;
  const Vec3i rv = map.indexOf(robot_pos);
  std::int64_t scanned = 0;
  if (map.inBounds(rv) && box.contains(rv) && isFree(map.linearIndex(rv)))
    seeds.push_back(map.linearIndex(rv));
  for (int z = box.min.z(); z <= box.max.z(); ++z)
    for (int y = box.min.y(); y <= box.max.y(); ++y)
      for (int x = box.min.x(); x <= box.max.x(); ++x) {
        const bool face = x == box.min.x() || x == box.max.x() || y == box.min.y() ||
                          y == box.max.y() || z == box.min.z() || z == box.max.z();
        if (!face) continue;
        ++scanned;
        const std::int32_t v = map.linearIndex(Vec3i{x, y, z});
        if (isFree(v)) seeds.push_back(v);
      }
  seeds.insert(seeds.end(), old_inside.begin(), old_inside.end());
  for (const std::int32_t v : old_inside) stored_.erase(v);

  // Classic four-set wavefront over known Free space inside the box.
  std::unordered_set<std::int32_t> map_open, map_closed, frontier_open, frontier_closed;
  std::queue<std::int32_t> queue_m;
  for (const std::int32_t s : seeds) {
    if (map_open.insert(s).second) queue_m.push(s);
  }
  std::array<Vec3i, 26> nb26;
  std::array<Vec3i, 6> nb6;

  const auto isFrontier = [&](std::int32_t v) { return map.isFrontierLinear(v); };

  while (!queue_m.empty()) {
    const std::int32_t p = queue_m.front();
    queue_m.pop();
    if (map_closed.count(p)) continue;
    ++scanned;

    if (isFrontier(p) && !frontier_closed.count(p)) {
      // inner wave: extract the whole frontier patch inside the box
      std::queue<std::int32_t> queue_f;
      queue_f.push(p);
      frontier_open.insert(p);
      while (!queue_f.empty()) {
        const std::int32_t q = queue_f.front();
        queue_f.pop();
        if (frontier_closed.count(q)) continue;
        ++scanned;
        if (isFrontier(q)) {
          stored_.insert(q);
          const int n = map.neighbors26(map.indexFromLinear(q), nb26);
          for (int k = 0; k < n; ++k) {
            const Vec3i& w = nb26[k];
            if (!box.contains(w)) continue;
            const std::int32_t wi = map.linearIndex(w);
            if (frontier_open.count(wi) || frontier_closed.count(wi)) continue;
            if (!isFree(wi)) continue;
            frontier_open.insert(wi);
            queue_f.push(wi);
          }
        }
        frontier_closed.insert(q);
      }
    }

    const int n = map.neighbors6(map.indexFromLinear(p), nb6);
    for (int k = 0; k < n; ++k) {
      const Vec3i& w = nb6[k];
      if (!box.contains(w)) continue;
      const std::int32_t wi = map.linearIndex(w);
      if (map_open.count(wi) || map_closed.count(wi)) continue;
      if (!isFree(wi)) continue;
      map_open.insert(wi);
      queue_m.push(wi);
    }
    map_closed.insert(p);
  }

  rep.scanned_voxels = scanned;
  rep.elapsed_us = sinceUs(t0);
  return rep;
}

std::vector<std::int32_t> AabbWfdDetector::frontierVoxels() const {
  return std::vector<std::int32_t>(stored_.begin(), stored_.end());
}

CandidatePlan exhaustivePlan(ExplorationPlanner& planner, const Roadmap& graph,
                             const std::vector<Candidate>& candidates, const Pose& robot,
                             const VoxelMap& map, PlanStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  CandidatePlan best;

  std::unordered_map<std::int32_t, std::int32_t> frontier_of;
  for (const Candidate& c : candidates) {
    const auto it = frontier_of.find(c.node_id);
    if (it == frontier_of.end() || c.frontier_id < it->second)
      frontier_of[c.node_id] = c.frontier_id;
  }
  if (stats) stats->candidates_total = static_cast<int>(frontier_of.size());
  if (frontier_of.empty() || graph.nodeCount() == 0) return best;

  const auto anchor = anchorEdges(graph, map, robot.position);
  if (anchor.empty()) return best;

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = graph.nodes().size();
  std::vector<double> dist(n, inf);
  std::vector<std::int32_t> parent(n, -2);
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (const auto& [nid, len] : anchor) {
    if (len < dist[nid]) {
      dist[nid] = len;
      parent[nid] = -1;
      heap.emplace(len, nid);
    }
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (stats) ++stats->nodes_settled;
    for (const auto& [w, len] : graph.edges(v)) {
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        parent[w] = v;
        heap.emplace(nd, w);
      }
    }
  }

  std::vector<std::int32_t> cand_nodes;
  cand_nodes.reserve(frontier_of.size());
  for (const auto& [nid, fid] : frontier_of) cand_nodes.push_back(nid);
  std::sort(cand_nodes.begin(), cand_nodes.end());

  for (const std::int32_t v : cand_nodes) {
    if (dist[v] == inf) continue;
    const auto [yaw, gain] = [&] {
      PlanStats dummy;
      PlanStats* s = stats ? stats : &dummy;
      const int before = s->gain_evaluations;
      auto r = planner.optimizeYaw(map, graph.node(v).pos);
      s->gain_evaluations = before + 1;
      return r;
    }();
    const double cost = planner.params().lambda * dist[v];
    const double u = utility(static_cast<double>(gain), cost);
    if (u > best.u || (u == best.u && !best.found)) {
      best.found = true;
      best.node_id = v;
      best.frontier_id = frontier_of[v];
      best.yaw = yaw;
      best.gain = gain;
      best.distance = dist[v];
      best.cost = cost;
      best.u = u;
    }
  }

  if (best.found) {
    std::vector<std::int32_t> path;
    for (std::int32_t v = best.node_id; v != -1; v = parent[v]) path.push_back(v);
    path.push_back(-1);
    std::reverse(path.begin(), path.end());
    best.node_path = path;
    best.waypoints.push_back(robot.position);
    for (std::size_t i = 1; i < path.size(); ++i)
      best.waypoints.push_back(graph.node(path[i]).pos);
  }
  if (stats) stats->elapsed_us = sinceUs(t0);
  return best;
}

}  // namespace fsmp
