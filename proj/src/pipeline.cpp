#include "fsmp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "fsmp/digest.hpp"
#include "fsmp/frontier_detector.hpp"
#include "fsmp/planner.hpp"
#include "fsmp/raycast.hpp"
#include "fsmp/roadmap.hpp"
#include "fsmp/sensor.hpp"
#include "fsmp/voxel_map.hpp"

namespace fsmp {

using json = nlohmann::ordered_json;

std::uint64_t digestMap(const VoxelMap& map) {
  std::uint64_t h = 14695981039346656037ull;
  const std::int64_t n = map.voxelCount();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto b = static_cast<unsigned char>(map.stateAtLinear(static_cast<std::int32_t>(i)));
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t digestFrontiers(const FrontierStore& store) {
  // Covers the partition, not the ids: member counts then members, per
  // cluster in id order, then the cluster count.
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& [id, f] : store.frontiers()) {
    const std::uint64_t m = f.members.size();
    h = fnv1aValue(m, h);
    h = fnv1aBytes(f.members.data(), f.members.size() * sizeof(std::int32_t), h);
  }
  const std::uint64_t count = store.frontiers().size();
  return fnv1aValue(count, h);
}

std::vector<std::uint8_t> coverageMask(const GroundTruthWorld& world, const VoxelMap& map,
                                       const Vec3& start) {
  const auto n = static_cast<std::size_t>(map.voxelCount());
  std::vector<std::uint8_t> gt_free(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3i v = map.indexFromLinear(static_cast<std::int32_t>(i));
    gt_free[i] = world.freeAt(map.centerOf(v)) ? 1 : 0;
  }

  std::vector<std::uint8_t> mask(n, 0);
  const Vec3i sv = map.indexOf(start);
  if (!map.inBounds(sv) || !gt_free[map.linearIndex(sv)])
    throw std::invalid_argument("coverage: start voxel is not free in the ground truth");

  std::queue<std::int32_t> q;
  const std::int32_t s = map.linearIndex(sv);
  mask[s] = 1;
  q.push(s);
  std::array<Vec3i, 6> nb;
  while (!q.empty()) {
    const std::int32_t v = q.front();
    q.pop();
    const int cnt = map.neighbors6(map.indexFromLinear(v), nb);
    for (int k = 0; k < cnt; ++k) {
      const std::int32_t w = map.linearIndex(nb[k]);
      if (!mask[w] && gt_free[w]) {
        mask[w] = 1;
        q.push(w);
      }
    }
  }
  // Occupied shell: solid voxels face-adjacent to reachable free space are
  // observable, so they belong in the denominator.
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i] || !gt_free[i]) continue;
    const int cnt = map.neighbors6(map.indexFromLinear(static_cast<std::int32_t>(i)), nb);
    for (int k = 0; k < cnt; ++k) {
      const std::int32_t w = map.linearIndex(nb[k]);
      if (!gt_free[w]) mask[w] = 1;
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// BenchCollector

BenchCollector::BenchCollector(std::vector<std::string> detectors)
    : detectors_(std::move(detectors)) {
  for (const std::string& d : detectors_) {
    if (d != "f3d" && d != "aabb_rg" && d != "aabb_wfd" && d != "naive")
      throw std::invalid_argument("bench: unknown detector '" + d + "'");
    series_.push_back(Series{d, {}, {}});
  }
}

bool BenchCollector::wants(const std::string& name) const {
  return std::find(detectors_.begin(), detectors_.end(), name) != detectors_.end();
}

BenchCollector::Series* BenchCollector::find(const std::string& name) {
  for (Series& s : series_)
    if (s.name == name) return &s;
  return nullptr;
}

void BenchCollector::init(const VoxelMap& map, int split_limit) {
  if (wants("aabb_rg")) rg_ = std::make_unique<AabbRgDetector>(map, split_limit);
  if (wants("aabb_wfd")) wfd_ = std::make_unique<AabbWfdDetector>(map);
}

void BenchCollector::onEpoch(const VoxelMap& map, const std::vector<Aabb>& change_boxes,
                             const Vec3& robot_pos, const DetectionReport& f3d_report,
                             const FrontierStore& store) {
  ++epochs_;
  const std::vector<std::int32_t> reference = store.allFrontierVoxels();
  const auto check = [&](const std::vector<std::int32_t>& got) {
    if (got != reference && first_mismatch_ < 0) first_mismatch_ = epochs_;
  };

  if (Series* s = find("f3d")) {
    s->scanned.push_back(f3d_report.scanned_voxels);
    s->micros.push_back(f3d_report.elapsed_us);
  }
  if (rg_) {
    const OracleReport r = rg_->detect(map, change_boxes);
    Series* s = find("aabb_rg");
    s->scanned.push_back(r.scanned_voxels);
    s->micros.push_back(r.elapsed_us);
    check(rg_->frontierVoxels());
  }
  if (wfd_) {
    const OracleReport r = wfd_->detect(map, change_boxes, robot_pos);
    Series* s = find("aabb_wfd");
    s->scanned.push_back(r.scanned_voxels);
    s->micros.push_back(r.elapsed_us);
    check(wfd_->frontierVoxels());
  }
  if (Series* s = find("naive")) {
    const OracleReport r = naiveDetect(map);
    s->scanned.push_back(r.scanned_voxels);
    s->micros.push_back(r.elapsed_us);
    check(r.frontier_voxels);
  }
}

// ---------------------------------------------------------------------------
// Run loop

namespace {

struct Runner {
  const Scenario& sc;
  const RunOptions& opt;

  GroundTruthWorld world;
  VoxelMap map;
  SensorSpec spec;
  Pose pose;

  FrontierStore store;
  FrontierDetector detector;
  Roadmap graph;
  ExplorationPlanner planner;
  std::optional<ExplorationPlanner> vplanner;

  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> gt_free;
  std::int64_t denom = 0;
  std::int64_t covered = 0;
  std::uint64_t cov_cursor = 0;

  std::ofstream metrics, timings, record;

  std::mt19937_64 mrng;
  std::int64_t mutations_done = 0;

  std::int32_t scan_id = 0;
  std::vector<FovRecord> fovs;
  std::vector<Aabb> change_boxes;
  bool map_changed_since_capture_eval = true;

  SmoothedPath path;
  std::size_t leg = 0;
  bool path_active = false;
  std::int32_t target_frontier = -1;

  std::unordered_set<std::int32_t> futile;
  Vec3 last_cap_pos = Vec3::Constant(1e300);
  double last_cap_yaw = 1e300;

  RunResult out;

  Runner(const Scenario& sc_, const RunOptions& opt_)
      : sc(sc_),
        opt(opt_),
        world(buildWorld(sc_)),
        map(makeWorldMap(world, sc_.resolution)),
        spec(resolvedSensor(sc_.sensor, sc_.resolution)),
        pose{snapOffFaces(sc_.start.position, sc_.resolution), normalizeYaw(sc_.start.yaw)},
        store(map),
        detector(map, sc_.n_max),
        graph(map, sc_.roadmap),
        planner(spec, sc_.resolution, sc_.utility),
        mrng(opt_.mutation_seed) {
    // Point predicates and the voxel grid can disagree by one ulp exactly on
    // voxel faces, so the ground truth is rasterized once and every safety
    // decision is made on voxels.
    detector.setInstrumented(opt_.verify_nonrepetition);
    gt_free.assign(static_cast<std::size_t>(map.voxelCount()), 0);
    for (std::int32_t i = 0; i < map.voxelCount(); ++i)
      gt_free[i] = world.freeAt(map.centerOf(map.indexFromLinear(i))) ? 1 : 0;

    const Vec3i sv = map.indexOf(pose.position);
    if (!map.inBounds(sv) || !gt_free[map.linearIndex(sv)])
      throw std::invalid_argument("run: start pose is inside an obstacle or wall");
    if (opt.verify_planner) vplanner.emplace(spec, sc.resolution, sc.utility);

    mask = coverageMask(world, map, pose.position);
    denom = std::count(mask.begin(), mask.end(), std::uint8_t{1});
    cov_cursor = map.journalBegin();

    if (!opt.metrics_path.empty()) {
      metrics.open(opt.metrics_path);
      if (!metrics) throw std::runtime_error("cannot write metrics file: " + opt.metrics_path);
      timings.open(opt.metrics_path + ".timings");
      json meta{{"schema", "fsmp-metrics-1"}, {"type", "meta"}, {"name", sc.name},
                {"seed", sc.seed}};
      metrics << meta.dump() << "\n";
    }
    if (!opt.record_path.empty()) {
      record.open(opt.record_path);
      if (!record) throw std::runtime_error("cannot write record file: " + opt.record_path);
      record << "# fsmp-run-journal v1\n";
      record << "scenario-begin\n";
      writeScenario(sc, record);
      record << "scenario-end\n";
    }
  }

  void fail(std::int64_t epoch, const std::string& what) {
    if (out.verify_failed) return;
    out.verify_failed = true;
    out.failure_epoch = epoch;
    out.failure = what;
  }

  void captureHere() {
    const DepthScan scan = capture(world, spec, pose);
    ++scan_id;
    ++out.scans;
    const Aabb changed = map.integrateScan(scan, scan_id);
    fovs.push_back(makeFovRecord(map, spec, pose, scan_id));
    if (opt.bench) change_boxes.push_back(changed);
    last_cap_pos = pose.position;
    last_cap_yaw = pose.yaw;
    if (!changed.empty()) {
      futile.clear();
      map_changed_since_capture_eval = true;
    } else {
      map_changed_since_capture_eval = false;
    }
  }

  void injectMutations(std::int64_t epoch) {
    if (opt.mutation_batch <= 0 || mutations_done >= opt.mutation_limit || fovs.empty()) return;
    for (int k = 0; k < opt.mutation_batch && mutations_done < opt.mutation_limit; ++k) {
      const FovRecord& f = fovs[mrng() % fovs.size()];
      const Aabb inner = f.voxel_box.inflated(-1);
      if (inner.empty()) continue;
      const Vec3i e = inner.extent();
      const Vec3i v{inner.min.x() + static_cast<int>(mrng() % e.x()),
                    inner.min.y() + static_cast<int>(mrng() % e.y()),
                    inner.min.z() + static_cast<int>(mrng() % e.z())};
      const auto cur = static_cast<int>(map.stateAt(v));
      const int other[2] = {(cur + 1) % 3, (cur + 2) % 3};
      const auto ns = static_cast<VoxelState>(other[mrng() % 2]);
      map.setState(v, ns, static_cast<std::int32_t>(-1000000 - epoch));
      ++mutations_done;
      futile.clear();
      map_changed_since_capture_eval = true;
    }
  }

  void updateCoverage() {
    const std::uint64_t end = map.journalEnd();
    for (std::uint64_t s = cov_cursor; s < end; ++s) {
      const JournalEntry& e = map.journalAt(s);
      if (!mask[e.index]) continue;
      const bool was = e.old_state != VoxelState::Unknown;
      const bool is = e.new_state != VoxelState::Unknown;
      if (!was && is) ++covered;
      if (was && !is) --covered;
    }
    cov_cursor = end;
  }

  // One straight travelled leg; counts at most one violation per leg. Every
  // sampled point must index a voxel that is Free in the belief map and free
  // in the rasterized ground truth.
  void checkLeg(const Vec3& a, const Vec3& b) {
    const double len = (b - a).norm();
    const double step = map.resolution() / 2.0;
    const int n = len > 0.0 ? static_cast<int>(std::ceil(len / step)) : 0;
    bool bad = false;
    for (int i = 0; i <= n && !bad; ++i) {
      const double t = std::min(len, i * step);
      const Vec3 p = len > 0.0 ? Vec3(a + (b - a) * (t / len)) : a;
      const Vec3i v = map.indexOf(p);
      if (!map.inBounds(v)) {
        bad = true;
        continue;
      }
      const std::int32_t lin = map.linearIndex(v);
      if (map.stateAtLinear(lin) != VoxelState::Free || !gt_free[lin]) bad = true;
    }
    if (bad) ++out.safety_violations;
  }

  void verifyEpoch(std::int64_t epoch, const DetectionReport& rep) {
    if (opt.verify_nonrepetition && rep.max_exams_per_voxel > 1)
      fail(epoch, "detector examined a voxel more than once (max " +
                      std::to_string(rep.max_exams_per_voxel) + ")");
    if (opt.verify_frontiers) {
      const OracleReport oracle = naiveDetect(map);
      if (store.allFrontierVoxels() != oracle.frontier_voxels)
        fail(epoch, "frontier voxel set diverged from full-grid relabeling");
    }
    if (opt.verify_roadmap) {
      const Roadmap::Violations v = graph.validate(map);
      if (!v.clean())
        fail(epoch, "roadmap invariants violated (node_not_free=" +
                        std::to_string(v.node_not_free) + " edge_length=" +
                        std::to_string(v.edge_length) + " edge_collision=" +
                        std::to_string(v.edge_collision) + " pair_too_close=" +
                        std::to_string(v.pair_too_close) + " asymmetric=" +
                        std::to_string(v.asymmetric) + ")");
    }
  }

  void verifyPlan(std::int64_t epoch, const std::vector<Candidate>& cands,
                  const CandidatePlan& lazy, const PlanStats& lazy_stats) {
    if (!vplanner) return;
    vplanner->bumpEpoch();
    PlanStats ex_stats;
    const CandidatePlan ex = exhaustivePlan(*vplanner, graph, cands, pose, map, &ex_stats);
    if (lazy.found != ex.found || (lazy.found && (lazy.node_id != ex.node_id ||
                                                  lazy.gain != ex.gain || lazy.u != ex.u ||
                                                  lazy.distance != ex.distance)))
      fail(epoch, "lazy plan diverged from exhaustive plan");
    if (lazy_stats.gain_evaluations > ex_stats.gain_evaluations)
      fail(epoch, "lazy plan evaluated more gains than exhaustive");
  }

  void emitEpochMetrics(std::int64_t epoch, const DetectionReport& rep,
                        std::int64_t journal_entries) {
    if (!metrics.is_open()) return;
    json j{{"type", "epoch"},
           {"epoch", epoch},
           {"scans", out.scans},
           {"sim_time", out.sim_time},
           {"distance", out.distance},
           {"frontier_clusters", store.frontiers().size()},
           {"frontier_voxels", store.frontierVoxelCount()},
           {"new_clusters", rep.new_ids.size()},
           {"removed_clusters", rep.removed_ids.size()},
           {"scanned_voxels", rep.scanned_voxels},
           {"roi_voxels", rep.roi_voxels},
           {"journal_entries", journal_entries},
           {"nodes", graph.nodeCount()},
           {"edges", graph.edgeCount()},
           {"covered_voxels", covered},
           {"coverage", denom > 0 ? static_cast<double>(covered) / static_cast<double>(denom) : 0.0},
           {"unknown_voxels", map.countOf(VoxelState::Unknown)},
           {"free_voxels", map.countOf(VoxelState::Free)},
           {"occupied_voxels", map.countOf(VoxelState::Occupied)},
           {"mutations", mutations_done}};
    metrics << j.dump() << "\n";
  }

  void emitPlanMetrics(std::int64_t epoch, const CandidatePlan& p, const PlanStats& st) {
    if (!metrics.is_open()) return;
    json j{{"type", "plan"},
           {"epoch", epoch},
           {"node", p.node_id},
           {"frontier", p.frontier_id},
           {"gain", p.gain},
           {"yaw", p.yaw},
           {"distance", p.distance},
           {"cost", p.cost},
           {"utility", p.u},
           {"path_nodes", p.node_path.size()},
           {"candidates", st.candidates_total},
           {"gain_evaluations", st.gain_evaluations},
           {"nodes_settled", st.nodes_settled}};
    metrics << j.dump() << "\n";
  }

  void emitTimings(std::int64_t epoch, double detect_us, double plan_us) {
    if (!timings.is_open()) return;
    json j{{"type", "timing"}, {"epoch", epoch}, {"detect_us", detect_us}, {"plan_us", plan_us}};
    timings << j.dump() << "\n";
  }

  void recordEpoch(std::int64_t epoch) {
    const std::uint64_t md = digestMap(map);
    const std::uint64_t fd = digestFrontiers(store);
    if (record.is_open()) {
      record << "epoch " << epoch << " pose " << doubleBits(pose.position.x()) << " "
             << doubleBits(pose.position.y()) << " " << doubleBits(pose.position.z()) << " "
             << doubleBits(pose.yaw) << " map " << hex64(md) << " frontiers " << hex64(fd)
             << " clusters " << store.frontiers().size() << " nodes " << graph.nodeCount()
             << " edges " << graph.edgeCount() << "\n";
    }
    if (opt.expected) {
      const auto i = static_cast<std::size_t>(epoch - 1);
      if (i >= opt.expected->size()) {
        fail(epoch, "run produced more epochs than the journal");
        return;
      }
      const EpochDigest& e = (*opt.expected)[i];
      const bool pose_ok = e.pose.position.x() == pose.position.x() &&
                           e.pose.position.y() == pose.position.y() &&
                           e.pose.position.z() == pose.position.z() && e.pose.yaw == pose.yaw;
      if (!pose_ok) fail(epoch, "pose diverged from journal");
      else if (e.map_digest != md) fail(epoch, "map digest diverged from journal");
      else if (e.frontier_digest != fd) fail(epoch, "frontier digest diverged from journal");
      else if (e.clusters != static_cast<std::int64_t>(store.frontiers().size()))
        fail(epoch, "cluster count diverged from journal");
      else if (e.nodes != static_cast<std::int64_t>(graph.nodeCount()) ||
               e.edges != static_cast<std::int64_t>(graph.edgeCount()))
        fail(epoch, "roadmap size diverged from journal");
    }
  }

  void finish(bool budget_hit, bool complete) {
    out.exit_code = budget_hit ? 2 : 0;
    out.complete = complete && !budget_hit && !out.verify_failed;
    out.coverage_denominator = denom;
    out.covered_voxels = covered;
    out.coverage = denom > 0 ? static_cast<double>(covered) / static_cast<double>(denom) : 0.0;
    out.frontier_clusters = static_cast<std::int64_t>(store.frontiers().size());
    out.frontier_voxels = static_cast<std::int64_t>(store.frontierVoxelCount());
    out.nodes = static_cast<std::int64_t>(graph.nodeCount());
    out.edges = static_cast<std::int64_t>(graph.edgeCount());
    out.mutations_injected = mutations_done;

    if (metrics.is_open()) {
      json j{{"type", "final"},
             {"exit", out.exit_code},
             {"complete", out.complete},
             {"epochs", out.epochs},
             {"scans", out.scans},
             {"sim_time", out.sim_time},
             {"distance", out.distance},
             {"coverage", out.coverage},
             {"covered_voxels", out.covered_voxels},
             {"coverage_denominator", out.coverage_denominator},
             {"safety_violations", out.safety_violations},
             {"frontier_clusters", out.frontier_clusters},
             {"frontier_voxels", out.frontier_voxels},
             {"nodes", out.nodes},
             {"edges", out.edges},
             {"mutations", out.mutations_injected}};
      metrics << j.dump() << "\n";
    }
    if (record.is_open()) {
      record << "final exit " << out.exit_code << " epochs " << out.epochs << " scans "
             << out.scans << " sim_time " << doubleBits(out.sim_time) << " distance "
             << doubleBits(out.distance) << " coverage " << doubleBits(out.coverage) << " safety "
             << out.safety_violations << " frontier_voxels " << out.frontier_voxels << "\n";
    }
  }

  RunResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    if (opt.bench) opt.bench->init(map, sc.n_max);

    bool budget_hit = false;
    bool complete = false;

    captureHere();
    injectMutations(0);

    while (true) {
      if (out.epochs >= sc.max_epochs) {
        budget_hit = true;
        break;
      }
      const std::int64_t epoch = ++out.epochs;

      updateCoverage();
      const auto journal_entries =
          static_cast<std::int64_t>(map.journalEnd() - map.journalBegin());
      const auto td0 = std::chrono::steady_clock::now();
      const DetectionReport rep = detector.detect(map, fovs, store);
      out.detector_scanned_total += rep.scanned_voxels;

      graph.prune(map);
      std::vector<const Frontier*> fresh;
      for (const std::int32_t id : rep.new_ids)
        if (store.has(id)) fresh.push_back(&store.frontier(id));
      const std::vector<SamplingRegion> regions = Roadmap::determineRegions(fovs, fresh);
      graph.extend(map, regions);
      planner.bumpEpoch();
      const double detect_us =
          std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - td0)
              .count();

      verifyEpoch(epoch, rep);
      if (opt.bench) opt.bench->onEpoch(map, change_boxes, pose.position, rep, store);
      emitEpochMetrics(epoch, rep, journal_entries);
      recordEpoch(epoch);
      fovs.clear();
      change_boxes.clear();
      if (out.verify_failed) break;

      if (opt.log && epoch % 50 == 0)
        *opt.log << "epoch " << epoch << ": coverage "
                 << (denom > 0 ? static_cast<double>(covered) / static_cast<double>(denom) : 0.0)
                 << ", clusters " << store.frontiers().size() << ", nodes " << graph.nodeCount()
                 << "\n";

      if (store.frontiers().empty()) {
        complete = true;
        emitTimings(epoch, detect_us, 0.0);
        break;
      }
      if (path_active && !store.has(target_frontier)) path_active = false;
      // Captures taken while walking can flip voxels along the rest of the
      // path; a leg that was free when planned must be re-proven before it is
      // flown. On failure the path is dropped and replanned from here.
      if (path_active)
        for (std::size_t i = leg; i < path.waypoints.size() && path_active; ++i)
          if (!segmentFree(map, path.waypoints[i - 1].position, path.waypoints[i].position))
            path_active = false;

      double plan_us = 0.0;
      if (!path_active) {
        const std::vector<Candidate> all = graph.assignCandidates(map, store);
        CandidatePlan plan;
        PlanStats st;
        for (;;) {
          std::vector<Candidate> cands;
          cands.reserve(all.size());
          for (const Candidate& c : all)
            if (!futile.count(c.node_id)) cands.push_back(c);
          if (cands.empty()) {
            plan = CandidatePlan{};
            break;
          }
          st = PlanStats{};
          const auto tp0 = std::chrono::steady_clock::now();
          plan = planner.plan(graph, cands, pose, map, &st);
          plan_us +=
              std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - tp0)
                  .count();
          verifyPlan(epoch, cands, plan, st);
          if (!plan.found) break;
          // A zero-length plan whose terminal yaw equals the last capture's
          // yaw would repeat that capture bit for bit; if that capture
          // already changed nothing, the node cannot make progress until the
          // map changes again.
          if (plan.distance == 0.0 && !map_changed_since_capture_eval &&
              pose.position == last_cap_pos && normalizeYaw(plan.yaw) == last_cap_yaw) {
            futile.insert(plan.node_id);
            continue;
          }
          break;
        }
        emitTimings(epoch, detect_us, plan_us);
        if (out.verify_failed) break;
        if (!plan.found || plan.gain == 0) {
          // Remaining frontiers are unobservable from any reachable
          // candidate: nothing a further scan could add.
          complete = true;
          break;
        }
        path = smoothPath(map, plan.waypoints, plan.yaw, sc.v_max, sc.a_max, sc.roadmap.d_max);
        leg = 1;
        path_active = path.waypoints.size() > 1;
        target_frontier = plan.frontier_id;
        emitPlanMetrics(epoch, plan, st);
        if (!path_active) {
          // Degenerate single-pose path: adopt the target yaw in place.
          pose.yaw = path.waypoints.front().yaw;
          captureHere();
          injectMutations(epoch);
          continue;
        }
      } else {
        emitTimings(epoch, detect_us, 0.0);
      }

      const Pose& wp = path.waypoints[leg];
      checkLeg(pose.position, wp.position);
      out.distance += (wp.position - pose.position).norm();
      out.sim_time += path.durations[leg - 1];
      pose = wp;
      if (leg + 1 >= path.waypoints.size())
        path_active = false;
      else
        ++leg;

      if (out.sim_time > sc.max_sim_time) {
        budget_hit = true;
        break;
      }
      captureHere();
      injectMutations(epoch);
    }

    updateCoverage();
    finish(budget_hit, complete);
    out.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (opt.log) {
      *opt.log << "run finished: exit " << out.exit_code << ", epochs " << out.epochs
               << ", coverage " << out.coverage << ", wall " << out.wall_ms << " ms\n";
      if (out.verify_failed)
        *opt.log << "verification FAILED at epoch " << out.failure_epoch << ": " << out.failure
                 << "\n";
    }
    return out;
  }
};

}  // namespace

RunResult runScenario(const Scenario& sc, const RunOptions& opt) {
  validateScenario(sc);
  Runner runner(sc, opt);
  return runner.run();
}

void writeRunCsv(const Scenario& sc, const RunResult& r, std::ostream& out) {
  out << "scenario,seed,exit,complete,epochs,scans,sim_time,distance,coverage,"
         "safety_violations,frontier_clusters,frontier_voxels,nodes,edges,wall_ms\n";
  out << sc.name << "," << sc.seed << "," << r.exit_code << "," << (r.complete ? 1 : 0) << ","
      << r.epochs << "," << r.scans << "," << doubleText(r.sim_time) << ","
      << doubleText(r.distance) << "," << doubleText(r.coverage) << "," << r.safety_violations
      << "," << r.frontier_clusters << "," << r.frontier_voxels << "," << r.nodes << ","
      << r.edges << "," << doubleText(r.wall_ms) << "\n";
}

// ---------------------------------------------------------------------------
// Replay

namespace {

struct ParsedJournal {
  Scenario scenario;
  std::vector<EpochDigest> epochs;
  bool has_final = false;
  int final_exit = 0;
  std::int64_t final_epochs = 0;
};

ParsedJournal parseRunJournal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run journal: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# fsmp-run-journal v1")
    throw std::runtime_error("run journal: bad magic line");
  if (!std::getline(in, line) || line != "scenario-begin")
    throw std::runtime_error("run journal: missing scenario block");

  std::ostringstream sc_text;
  while (std::getline(in, line) && line != "scenario-end") sc_text << line << "\n";
  if (line != "scenario-end") throw std::runtime_error("run journal: unterminated scenario block");

  ParsedJournal pj;
  {
    std::istringstream ss(sc_text.str());
    pj.scenario = parseScenario(ss);
  }

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "epoch") {
      EpochDigest e;
      std::string tok, bx, by, bz, byaw, hmap, hfront;
      ls >> e.epoch >> tok >> bx >> by >> bz >> byaw;
      if (tok != "pose") throw std::runtime_error("run journal: malformed epoch line");
      ls >> tok >> hmap;
      if (tok != "map") throw std::runtime_error("run journal: malformed epoch line");
      ls >> tok >> hfront;
      if (tok != "frontiers") throw std::runtime_error("run journal: malformed epoch line");
      ls >> tok >> e.clusters >> tok >> e.nodes >> tok >> e.edges;
      if (ls.fail()) throw std::runtime_error("run journal: malformed epoch line");
      e.pose.position = Vec3(bitsToDouble(bx), bitsToDouble(by), bitsToDouble(bz));
      e.pose.yaw = bitsToDouble(byaw);
      e.map_digest = std::stoull(hmap, nullptr, 16);
      e.frontier_digest = std::stoull(hfront, nullptr, 16);
      pj.epochs.push_back(e);
    } else if (kind == "final") {
      std::string tok;
      ls >> tok >> pj.final_exit >> tok >> pj.final_epochs;
      pj.has_final = true;
    } else {
      throw std::runtime_error("run journal: unknown record '" + kind + "'");
    }
  }
  return pj;
}

}  // namespace

ReplayResult replayJournal(const std::string& path, int mutation_batch,
                           std::int64_t mutation_limit, std::uint64_t mutation_seed,
                           std::ostream* log) {
  const ParsedJournal pj = parseRunJournal(path);

  RunOptions opt;
  opt.verify_frontiers = true;
  opt.verify_roadmap = true;
  opt.verify_planner = true;
  opt.verify_nonrepetition = true;
  opt.log = log;
  const bool mutated = mutation_batch > 0 && mutation_limit > 0;
  if (mutated) {
    opt.mutation_batch = mutation_batch;
    opt.mutation_limit = mutation_limit;
    opt.mutation_seed = mutation_seed;
  } else {
    opt.expected = &pj.epochs;
  }

  ReplayResult rr;
  rr.run = runScenario(pj.scenario, opt);

  if (rr.run.verify_failed) {
    rr.matched = false;
    rr.mismatch_epoch = rr.run.failure_epoch;
    rr.detail = rr.run.failure;
    return rr;
  }
  if (mutated) {
    rr.matched = true;  // oracle checks passed; digests intentionally diverge
    return rr;
  }
  if (rr.run.epochs != static_cast<std::int64_t>(pj.epochs.size())) {
    rr.matched = false;
    rr.mismatch_epoch = rr.run.epochs;
    rr.detail = "epoch count diverged from journal";
    return rr;
  }
  if (pj.has_final &&
      (pj.final_exit != rr.run.exit_code || pj.final_epochs != rr.run.epochs)) {
    rr.matched = false;
    rr.mismatch_epoch = rr.run.epochs;
    rr.detail = "final summary diverged from journal";
    return rr;
  }
  rr.matched = true;
  return rr;
}

// ---------------------------------------------------------------------------
// Bench

BenchReport benchScenario(const Scenario& sc, const std::vector<std::string>& detectors,
                          std::ostream* log) {
  BenchCollector collector(detectors);
  RunOptions opt;
  opt.bench = &collector;
  opt.log = log;

  BenchReport report;
  report.run = runScenario(sc, opt);
  report.series = collector.series();
  report.epochs = collector.epochs();
  report.sets_match = collector.setsMatch();
  report.first_mismatch_epoch = collector.firstMismatchEpoch();
  return report;
}

void writeBenchCsv(const BenchReport& report, std::ostream& out) {
  out << "detector,iteration,scanned_voxels,micros\n";
  for (const auto& s : report.series)
    for (std::size_t i = 0; i < s.scanned.size(); ++i)
      out << s.name << "," << i << "," << s.scanned[i] << "," << doubleText(s.micros[i]) << "\n";
}

}  // namespace fsmp
