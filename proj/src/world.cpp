#include <fsmp/world.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fsmp {

namespace {

// std::uniform_int_distribution is implementation-defined; a plain modulus
// keeps generated worlds identical across toolchains (bias is irrelevant
// here). mt19937_64 itself is bit-exact by the standard.
std::uint64_t randBelow(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double snap(double v, double res) { return std::round(v / res) * res; }

}  // namespace

GroundTruthWorld::GroundTruthWorld(const Vec3& lo, const Vec3& hi) : lo_(lo), hi_(hi) {
  if (!(lo.x() < hi.x() && lo.y() < hi.y() && lo.z() < hi.z()))
    throw std::invalid_argument("world bounds must have positive extent");
}

void GroundTruthWorld::addBox(const Vec3& lo, const Vec3& hi) {
  if (!(lo.x() < hi.x() && lo.y() < hi.y() && lo.z() < hi.z()))
    throw std::invalid_argument("obstacle box must have positive extent");
  boxes_.push_back(ObstacleBox{lo, hi});
}

bool GroundTruthWorld::occupiedAt(const Vec3& p) const {
  // Half-open membership [lo, hi) matches floor-based voxelization, so a
  // point on a shared face belongs to exactly one side and point tests agree
  // with the rasterized grid everywhere.
  for (int a = 0; a < 3; ++a)
    if (p[a] < lo_[a] || p[a] >= hi_[a]) return true;
  for (const ObstacleBox& b : boxes_) {
    bool inside = true;
    for (int a = 0; a < 3 && inside; ++a) inside = p[a] >= b.lo[a] && p[a] < b.hi[a];
    if (inside) return true;
  }
  return false;
}

double GroundTruthWorld::castRay(const Vec3& start, const Vec3& dir) const {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0)
      best = std::min(best, (hi_[a] - start[a]) / dir[a]);
    else if (dir[a] < 0.0)
      best = std::min(best, (lo_[a] - start[a]) / dir[a]);
  }
  for (const ObstacleBox& b : boxes_) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int a = 0; a < 3 && ok; ++a) {
      if (dir[a] == 0.0) {
        if (start[a] < b.lo[a] || start[a] >= b.hi[a]) ok = false;
        continue;
      }
      double ta = (b.lo[a] - start[a]) / dir[a];
      double tb = (b.hi[a] - start[a]) / dir[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 >= t1) ok = false;  // zero-measure grazes are misses
    }
    if (ok && t1 > 0.0) best = std::min(best, std::max(t0, 0.0));
  }
  return best;
}

void GroundTruthWorld::write(std::ostream& os) const {
  os << "# fsmp-scene v1\n";
  os << std::setprecision(17);
  os << "bounds " << lo_.x() << " " << lo_.y() << " " << lo_.z() << " " << hi_.x() << " "
     << hi_.y() << " " << hi_.z() << "\n";
  for (const ObstacleBox& b : boxes_) {
    os << "box " << b.lo.x() << " " << b.lo.y() << " " << b.lo.z() << " " << b.hi.x() << " "
       << b.hi.y() << " " << b.hi.z() << "\n";
  }
}

GroundTruthWorld GroundTruthWorld::read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# fsmp-scene v1")
    throw std::runtime_error("scene: bad magic line");

  bool have_bounds = false;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  std::vector<ObstacleBox> boxes;

  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "bounds") {
      ls >> lo.x() >> lo.y() >> lo.z() >> hi.x() >> hi.y() >> hi.z();
      if (ls.fail()) throw std::runtime_error("scene: malformed bounds line");
      have_bounds = true;
    } else if (key == "box") {
      ObstacleBox b;
      ls >> b.lo.x() >> b.lo.y() >> b.lo.z() >> b.hi.x() >> b.hi.y() >> b.hi.z();
      if (ls.fail()) throw std::runtime_error("scene: malformed box line");
      boxes.push_back(b);
    } else {
      throw std::runtime_error("scene: unknown record '" + key + "'");
    }
  }
  if (!have_bounds) throw std::runtime_error("scene: missing bounds");

  GroundTruthWorld w(lo, hi);
  for (const ObstacleBox& b : boxes) w.addBox(b.lo, b.hi);
  return w;
}

GroundTruthWorld GroundTruthWorld::generateMaze(const Vec3& size, double resolution,
                                                std::uint64_t seed) {
  const double wall = resolution;
  const double pitch = snap(2.0, resolution);
  const Vec3 sz{snap(size.x(), resolution), snap(size.y(), resolution),
                snap(size.z(), resolution)};
  const int nx = std::max(1, static_cast<int>(std::floor(sz.x() / pitch)));
  const int ny = std::max(1, static_cast<int>(std::floor(sz.y() / pitch)));

  std::mt19937_64 rng(seed);

  // Depth-first perfect maze over the cell lattice, then a few extra openings
  // so the result has loops.
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(nx) * ny, 0);
  std::vector<std::uint8_t> open_east(static_cast<std::size_t>(nx) * ny, 0);
  std::vector<std::uint8_t> open_north(static_cast<std::size_t>(nx) * ny, 0);
  const auto cell = [&](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };

  std::vector<std::pair<int, int>> stack;
  stack.emplace_back(0, 0);
  visited[cell(0, 0)] = 1;
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    int options[4];
    int n_opt = 0;
    if (i + 1 < nx && !visited[cell(i + 1, j)]) options[n_opt++] = 0;
    if (i - 1 >= 0 && !visited[cell(i - 1, j)]) options[n_opt++] = 1;
    if (j + 1 < ny && !visited[cell(i, j + 1)]) options[n_opt++] = 2;
    if (j - 1 >= 0 && !visited[cell(i, j - 1)]) options[n_opt++] = 3;
    if (n_opt == 0) {
      stack.pop_back();
      continue;
    }
    switch (options[randBelow(rng, static_cast<std::uint64_t>(n_opt))]) {
      case 0:
        open_east[cell(i, j)] = 1;
        visited[cell(i + 1, j)] = 1;
        stack.emplace_back(i + 1, j);
        break;
      case 1:
        open_east[cell(i - 1, j)] = 1;
        visited[cell(i - 1, j)] = 1;
        stack.emplace_back(i - 1, j);
        break;
      case 2:
        open_north[cell(i, j)] = 1;
        visited[cell(i, j + 1)] = 1;
        stack.emplace_back(i, j + 1);
        break;
      default:
        open_north[cell(i, j - 1)] = 1;
        visited[cell(i, j - 1)] = 1;
        stack.emplace_back(i, j - 1);
        break;
    }
  }
  const int extra = (nx * ny) / 8;
  for (int k = 0; k < extra; ++k) {
    const int i = static_cast<int>(randBelow(rng, static_cast<std::uint64_t>(nx)));
    const int j = static_cast<int>(randBelow(rng, static_cast<std::uint64_t>(ny)));
    if (randBelow(rng, 2) == 0) {
      if (i + 1 < nx) open_east[cell(i, j)] = 1;
    } else {
      if (j + 1 < ny) open_north[cell(i, j)] = 1;
    }
  }

  GroundTruthWorld w(Vec3::Zero(), sz);
  // Closed boundaries become full-height slabs spanning the shared edge; the
  // last row/column of cells stretches to the world wall.
  const auto cellMaxX = [&](int i) { return i + 1 == nx ? sz.x() : (i + 1) * pitch; };
  const auto cellMaxY = [&](int j) { return j + 1 == ny ? sz.y() : (j + 1) * pitch; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (i + 1 < nx && !open_east[cell(i, j)]) {
        const double x = (i + 1) * pitch;
        w.addBox(Vec3{x - wall, j * pitch, 0.0}, Vec3{x, cellMaxY(j), sz.z()});
      }
      if (j + 1 < ny && !open_north[cell(i, j)]) {
        const double y = (j + 1) * pitch;
        w.addBox(Vec3{i * pitch, y - wall, 0.0}, Vec3{cellMaxX(i), y, sz.z()});
      }
    }
  return w;
}

GroundTruthWorld GroundTruthWorld::generateBuilding(const Vec3& size, double resolution,
                                                    std::uint64_t seed) {
  const double wall = resolution;
  const double room = snap(4.0, resolution);
  const Vec3 sz{snap(size.x(), resolution), snap(size.y(), resolution),
                snap(size.z(), resolution)};
  const int nx = std::max(1, static_cast<int>(std::floor(sz.x() / room)));
  const int ny = std::max(1, static_cast<int>(std::floor(sz.y() / room)));

  std::mt19937_64 rng(seed);
  GroundTruthWorld w(Vec3::Zero(), sz);

  const double door = snap(1.2, resolution);
  const auto spanMaxX = [&](int i) { return i + 1 == nx ? sz.x() : (i + 1) * room; };
  const auto spanMaxY = [&](int j) { return j + 1 == ny ? sz.y() : (j + 1) * room; };

  // Interior walls with one full-height doorway per shared edge.
  const auto wallWithDoor = [&](double fixed_lo, double fixed_hi, double edge_lo, double edge_hi,
                                bool along_x) {
    const double span = edge_hi - edge_lo;
    const int slots = std::max(1, static_cast<int>(std::floor((span - door) / resolution)));
    const double off = snap(static_cast<double>(randBelow(rng, static_cast<std::uint64_t>(slots))) *
                                resolution,
                            resolution);
    const double d0 = edge_lo + off;
    const double d1 = d0 + door;
    if (d0 > edge_lo + 1e-9) {
      if (along_x)
        w.addBox(Vec3{edge_lo, fixed_lo, 0.0}, Vec3{d0, fixed_hi, sz.z()});
      else
        w.addBox(Vec3{fixed_lo, edge_lo, 0.0}, Vec3{fixed_hi, d0, sz.z()});
    }
    if (d1 < edge_hi - 1e-9) {
      if (along_x)
        w.addBox(Vec3{d1, fixed_lo, 0.0}, Vec3{edge_hi, fixed_hi, sz.z()});
      else
        w.addBox(Vec3{fixed_lo, d1, 0.0}, Vec3{fixed_hi, edge_hi, sz.z()});
    }
  };

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const double x = (i + 1) * room;
      wallWithDoor(x - wall, x, j * room, spanMaxY(j), /*along_x=*/false);
    }
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double y = (j + 1) * room;
      wallWithDoor(y - wall, y, i * room, spanMaxX(i), /*along_x=*/true);
    }

  // Furniture: full-height columns and waist-high blocks scattered per room.
  const double col = snap(0.4, resolution);
  const double block_h = std::min(sz.z(), snap(1.0, resolution));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const bool bare = randBelow(rng, 3) == 0;  // leave some rooms bare
      if (bare || (i == 0 && j == 0)) continue;  // room (0,0) hosts the start pose
      const double cx0 = i * room + 2 * wall, cx1 = spanMaxX(i) - 2 * wall - col;
      const double cy0 = j * room + 2 * wall, cy1 = spanMaxY(j) - 2 * wall - col;
      if (cx1 <= cx0 || cy1 <= cy0) continue;
      const int sx = static_cast<int>(std::floor((cx1 - cx0) / resolution));
      const int sy = static_cast<int>(std::floor((cy1 - cy0) / resolution));
      const double px = cx0 + static_cast<double>(randBelow(rng, static_cast<std::uint64_t>(sx + 1))) * resolution;
      const double py = cy0 + static_cast<double>(randBelow(rng, static_cast<std::uint64_t>(sy + 1))) * resolution;
      if (randBelow(rng, 2) == 0) {
        w.addBox(Vec3{px, py, 0.0}, Vec3{px + col, py + col, sz.z()});
      } else {
        const double bw = snap(0.8, resolution);
        const double bx1 = std::min(px + bw, cx1 + col), by1 = std::min(py + bw, cy1 + col);
        w.addBox(Vec3{px, py, 0.0}, Vec3{bx1, by1, block_h});
      }
    }
  return w;
}

GroundTruthWorld readSceneFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  return GroundTruthWorld::read(in);
}

void writeSceneFile(const GroundTruthWorld& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  w.write(out);
}

VoxelMap makeWorldMap(const GroundTruthWorld& world, double resolution) {
  const Vec3 size = world.hi() - world.lo();
  Vec3i interior;
  for (int a = 0; a < 3; ++a) {
    const double n = size[a] / resolution;
    interior[a] = static_cast<int>(std::llround(n));
    if (std::abs(n - interior[a]) > 1e-6)
      throw std::invalid_argument("world extent is not a multiple of the resolution");
  }
  const Vec3 origin = world.lo() - Vec3::Constant(resolution);
  return VoxelMap(origin, resolution, interior + Vec3i::Constant(2));
}

VoxelState groundTruthState(const GroundTruthWorld& world, const VoxelMap& map, const Vec3i& v) {
  return world.occupiedAt(map.centerOf(v)) ? VoxelState::Occupied : VoxelState::Free;
}

}  // namespace fsmp
