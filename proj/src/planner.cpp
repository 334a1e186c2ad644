#include <fsmp/planner.hpp>
#include <fsmp/raycast.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <stdexcept>

namespace fsmp {

double utility(double gain, double cost) { return gain * std::exp(-cost); }

double radiusBound(double u, double i_max, double lambda) {
  if (lambda <= 0.0 || u <= 0.0) return std::numeric_limits<double>::infinity();
  if (u >= i_max) return 0.0;
  return -std::log(u / i_max) / lambda;
}

std::int64_t visibilityVoxelBound(double max_range, double resolution) {
  // Any voxel with visible content holds a point within max_range of the
  // apex, so its center is within max_range + half a voxel diagonal; another
  // half diagonal absorbs the apex's own sub-voxel offset.
  const double r = max_range / resolution + std::sqrt(3.0);
  const int m = static_cast<int>(std::ceil(r));
  const double r2 = r * r;
  std::int64_t count = 0;
  for (int z = -m; z <= m; ++z)
    for (int y = -m; y <= m; ++y)
      for (int x = -m; x <= m; ++x)
        if (static_cast<double>(x) * x + static_cast<double>(y) * y +
                static_cast<double>(z) * z <=
            r2)
          ++count;
  return count;
}

ExplorationPlanner::ExplorationPlanner(const SensorSpec& spec, double resolution,
                                       const UtilityParams& params)
    : resolution_(resolution), params_(params) {
  if (params_.lambda < 0.0) throw std::invalid_argument("planner: lambda must be >= 0");
  if (params_.yaw_bins < 1) throw std::invalid_argument("planner: need at least one yaw bin");
  if (params_.gain_ray_factor < 1)
    throw std::invalid_argument("planner: gain ray factor must be >= 1");
  gain_spec_ = resolvedSensor(spec, resolution);
  stride_h_ = std::min(params_.gain_ray_factor, gain_spec_.rays_h - 1);
  stride_v_ = std::min(params_.gain_ray_factor, gain_spec_.rays_v - 1);
  i_max_ = params_.i_max > 0 ? params_.i_max
                             : visibilityVoxelBound(gain_spec_.max_range, resolution);
}

std::int64_t ExplorationPlanner::voxelGain(const VoxelMap& map, const Vec3& position, double yaw) {
  const Vec3i pv = map.indexOf(position);
  if (!map.inBounds(pv) || map.stateAt(pv) != VoxelState::Free)
    throw std::invalid_argument("voxelGain: position voxel is not Free");

  if (seen_stamp_.size() != static_cast<std::size_t>(map.voxelCount())) {
    seen_stamp_.assign(static_cast<std::size_t>(map.voxelCount()), 0);
    seen_round_ = 0;
  }
  if (seen_round_ == std::numeric_limits<std::int32_t>::max()) {
    std::fill(seen_stamp_.begin(), seen_stamp_.end(), 0);
    seen_round_ = 0;
  }
  ++seen_round_;

  const CameraFrame cam = cameraFrame(yaw);
  const double W = gain_spec_.tanHalfH();
  const double H = gain_spec_.tanHalfV();
  std::int64_t gain = 0;

  // Stride over the capture grid: for j,i also emitted by capture() at this
  // pose, a and b below are computed by the same expression, so dir matches
  // the capture ray bit for bit.
  for (int j = 0; j < gain_spec_.rays_v; j += stride_v_) {
    const double b = -H + (2.0 * H) * j / (gain_spec_.rays_v - 1);
    for (int i = 0; i < gain_spec_.rays_h; i += stride_h_) {
      const double a = -W + (2.0 * W) * i / (gain_spec_.rays_h - 1);
      const Vec3 dir = (cam.forward + a * cam.left + b * cam.up).normalized();
      traverseGrid(map.origin(), map.resolution(), position, dir, gain_spec_.max_range,
                   [&](const Vec3i& cell, double t) {
                     if (!map.inBounds(cell)) return false;
                     const std::int32_t v = map.linearIndex(cell);
                     const VoxelState s = map.stateAtLinear(v);
                     if (s == VoxelState::Occupied) return false;
                     if (s == VoxelState::Unknown && t >= gain_spec_.min_range &&
                         seen_stamp_[v] != seen_round_) {
                       seen_stamp_[v] = seen_round_;
                       ++gain;
                     }
                     return true;
                   });
    }
  }
  return gain;
}

std::pair<double, std::int64_t> ExplorationPlanner::optimizeYaw(const VoxelMap& map,
                                                                const Vec3& position) {
  const double step = 2.0 * std::numbers::pi / params_.yaw_bins;
  double best_yaw = 0.0;
  std::int64_t best_gain = -1;
  for (int k = 0; k < params_.yaw_bins; ++k) {
    const double yaw = normalizeYaw(k * step);
    const std::int64_t g = voxelGain(map, position, yaw);
    if (g > best_gain || (g == best_gain && yaw < best_yaw)) {
      best_gain = g;
      best_yaw = yaw;
    }
  }
  return {best_yaw, best_gain};
}

std::pair<double, std::int64_t> ExplorationPlanner::memoizedYawGain(const VoxelMap& map,
                                                                    const Vec3& position,
                                                                    std::int32_t node_id,
                                                                    PlanStats* stats) {
  const auto it = memo_.find(node_id);
  if (it != memo_.end()) return it->second;
  const std::pair<double, std::int64_t> r = optimizeYaw(map, position);
  if (stats) ++stats->gain_evaluations;
  memo_.emplace(node_id, r);
  return r;
}

std::vector<std::pair<std::int32_t, double>> anchorEdges(const Roadmap& graph,
                                                         const VoxelMap& map, const Vec3& pos,
                                                         int k) {
  std::vector<std::pair<std::int32_t, double>> edges;
  for (const auto& [dist, nid] : graph.nearestNodes(pos, graph.params().d_max, k))
    if (segmentFree(map, pos, graph.node(nid).pos)) edges.emplace_back(nid, dist);
  if (edges.empty()) {
    const std::int32_t nid = graph.nearestNode(pos);
    if (nid >= 0) edges.emplace_back(nid, (graph.node(nid).pos - pos).norm());
  }
  return edges;
}

CandidatePlan ExplorationPlanner::plan(const Roadmap& graph,
                                       const std::vector<Candidate>& candidates,
                                       const Pose& robot, const VoxelMap& map, PlanStats* stats) {
  const auto t_start = std::chrono::steady_clock::now();
  CandidatePlan best;

  // Candidates collapse onto distinct nodes; a node observing several
  // frontiers keeps the smallest frontier id for reporting.
  std::unordered_map<std::int32_t, std::int32_t> frontier_of;
  for (const Candidate& c : candidates) {
    const auto it = frontier_of.find(c.node_id);
    if (it == frontier_of.end() || c.frontier_id < it->second)
      frontier_of[c.node_id] = c.frontier_id;
  }
  if (stats) stats->candidates_total = static_cast<int>(frontier_of.size());
  if (frontier_of.empty() || graph.nodeCount() == 0) return best;

  const std::vector<std::pair<std::int32_t, double>> anchor =
      anchorEdges(graph, map, robot.position);
  if (anchor.empty()) return best;

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = graph.nodes().size();
  std::vector<double> dist(n, inf);
  std::vector<std::int32_t> parent(n, -2);  // -2 unvisited, -1 anchored at robot
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (const auto& [nid, len] : anchor) {
    if (len < dist[nid]) {
      dist[nid] = len;
      parent[nid] = -1;
      heap.emplace(len, nid);
    }
  }

  double radius = inf;
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (d > radius) break;  // nothing farther can beat the incumbent
    if (stats) ++stats->nodes_settled;

    const auto cand = frontier_of.find(v);
    if (cand != frontier_of.end()) {
      const auto [yaw, gain] = memoizedYawGain(map, graph.node(v).pos, v, stats);
      const double cost = params_.lambda * d;
      const double u = utility(static_cast<double>(gain), cost);
      if (u > best.u || (u == best.u && (!best.found || v < best.node_id))) {
        best.found = true;
        best.node_id = v;
        best.frontier_id = cand->second;
        best.yaw = yaw;
        best.gain = gain;
        best.distance = d;
        best.cost = cost;
        best.u = u;
        radius = radiusBound(u, static_cast<double>(i_max_), params_.lambda);
        if (stats) stats->radius_trace.push_back(radius);
      }
    }

    for (const auto& [w, len] : graph.edges(v)) {
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        parent[w] = v;
        heap.emplace(nd, w);
      }
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
  if (stats)
    stats->elapsed_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t_start)
            .count();
  return best;
}

double trapezoidTime(double len, double v_max, double a_max) {
  if (len <= 0.0) return 0.0;
  const double ramp = v_max * v_max / a_max;  // distance to reach and shed v_max
  if (len >= ramp) return len / v_max + v_max / a_max;
  return 2.0 * std::sqrt(len / a_max);
}

SmoothedPath smoothPath(const VoxelMap& map, const std::vector<Vec3>& points, double target_yaw,
                        double v_max, double a_max, double max_leg, int iterations) {
  SmoothedPath out;
  if (points.empty()) return out;

  std::vector<Vec3> pts = points;
  std::mt19937_64 rng(0x736d6f6f7468ull);  // fixed: smoothing is deterministic
  for (int it = 0; it < iterations && pts.size() > 2; ++it) {
    const std::size_t n = pts.size();
    const std::size_t i = rng() % (n - 2);
    const std::size_t j = i + 2 + rng() % (n - i - 2);
    if (segmentFree(map, pts[i], pts[j]))
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                pts.begin() + static_cast<std::ptrdiff_t>(j));
  }

  // Subdivide long legs so captures happen at bounded spacing.
  std::vector<Vec3> walked{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec3 a = pts[i - 1], b = pts[i];
    const double len = (b - a).norm();
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_leg - 1e-12)));
    for (int p = 1; p < pieces; ++p)
      walked.push_back(a + (b - a) * (static_cast<double>(p) / pieces));
    walked.push_back(b);  // land on the vertex exactly, not within rounding of it
  }

  // Intermediate waypoints look along the upcoming leg; the final waypoint
  // faces the optimized target yaw.
  out.waypoints.reserve(walked.size());
  double prev_yaw = target_yaw;
  for (std::size_t i = 0; i < walked.size(); ++i) {
    Pose p;
    p.position = walked[i];
    if (i + 1 < walked.size()) {
      const Vec3 d = walked[i + 1] - walked[i];
      p.yaw = (d.x() == 0.0 && d.y() == 0.0) ? prev_yaw : normalizeYaw(std::atan2(d.y(), d.x()));
    } else {
      p.yaw = normalizeYaw(target_yaw);
    }
    prev_yaw = p.yaw;
    out.waypoints.push_back(p);
  }

  for (std::size_t i = 1; i < out.waypoints.size(); ++i) {
    const double len = (out.waypoints[i].position - out.waypoints[i - 1].position).norm();
    out.length += len;
    const double t = trapezoidTime(len, v_max, a_max);
    out.durations.push_back(t);
    out.total_duration += t;
  }
  return out;
}

}  // namespace fsmp
