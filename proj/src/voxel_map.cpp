#include <fsmp/raycast.hpp>
#include <fsmp/voxel_map.hpp>

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fsmp {

namespace {
// Pushed past the hit face so the occupied voxel is sampled inside the
// obstacle rather than on its boundary. Far below any usable resolution.
constexpr double kHitNudge = 1e-6;
// Minimum along-ray chord a cell must subtend before a ray may carve it Free:
// far above rounding jitter, far below any cell a ray meaningfully crosses.
constexpr double kMinChord = 1e-9;
}  // namespace

VoxelMap::VoxelMap(const Vec3& origin, double resolution, const Vec3i& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0.0)) throw std::invalid_argument("voxel resolution must be positive");
  if (dims.x() <= 0 || dims.y() <= 0 || dims.z() <= 0)
    throw std::invalid_argument("voxel grid dims must be positive");
  const std::int64_t n = static_cast<std::int64_t>(dims.x()) * dims.y() * dims.z();
  if (n > std::numeric_limits<std::int32_t>::max())
    throw std::invalid_argument("voxel grid exceeds 32-bit indexing");
  states_.assign(static_cast<std::size_t>(n), VoxelState::Unknown);
  state_counts_[static_cast<int>(VoxelState::Unknown)] = n;
}

VoxelState VoxelMap::stateAt(const Vec3i& p) const {
  if (!inBounds(p)) {
    std::ostringstream msg;
    msg << "voxel (" << p.x() << "," << p.y() << "," << p.z() << ") outside grid " << dims_.x()
        << "x" << dims_.y() << "x" << dims_.z();
    throw std::out_of_range(msg.str());
  }
  return states_[linearIndex(p)];
}

void VoxelMap::applyState(std::int32_t linear, VoxelState s, std::int32_t scan_id, Aabb& changed) {
  VoxelState& slot = states_[linear];
  if (slot == s) return;
  journal_.push_back(JournalEntry{linear, slot, s, scan_id});
  --state_counts_[static_cast<int>(slot)];
  ++state_counts_[static_cast<int>(s)];
  slot = s;
  changed.expand(indexFromLinear(linear));
}

void VoxelMap::setState(const Vec3i& p, VoxelState s, std::int32_t scan_id) {
  if (!inBounds(p)) {
    std::ostringstream msg;
    msg << "setState voxel (" << p.x() << "," << p.y() << "," << p.z() << ") outside grid";
    throw std::out_of_range(msg.str());
  }
  Aabb scratch;
  applyState(linearIndex(p), s, scan_id, scratch);
}

Aabb VoxelMap::integrateScan(const DepthScan& scan, std::int32_t scan_id) {
  if (stamp_.size() != states_.size()) stamp_.assign(states_.size(), 0);
  if (stamp_epoch_ > std::numeric_limits<std::int32_t>::max() - 8) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    stamp_epoch_ = 0;
  }
  stamp_epoch_ += 2;
  const std::int32_t free_tag = stamp_epoch_;
  const std::int32_t occ_tag = stamp_epoch_ + 1;

  // Voxels first marked within this scan, in discovery order. Within one scan
  // an occupied mark beats any number of free marks: rays grazing the face of
  // a hit voxel must not carve it free.
  std::vector<std::int32_t> touched;
  touched.reserve(scan.rays.size() * 4);

  const Vec3 lo = minCorner();
  const Vec3 hi = maxCorner();

  for (const DepthRay& ray : scan.rays) {
    if (ray.kind == DepthRay::Kind::Invalid) continue;
    const bool hit = ray.kind == DepthRay::Kind::Hit;
    // A hit ray walks slightly past its endpoint so the obstacle cell is the
    // one the same traversal occupies there: a hit landing exactly on a voxel
    // face then resolves into the cell beyond the face, and the free pass can
    // never disagree with the occupied mark about which cell that is.
    const double len = (hit ? ray.range + kHitNudge : scan.max_range);

    double t0 = 0.0, t1 = 0.0;
    if (!clipSegmentToBox(scan.origin, ray.dir, len, lo, hi, t0, t1) || t1 <= t0) continue;
    const Vec3 entry = scan.origin + ray.dir * t0;
    std::int32_t pending = -1;
    // A cell is carved Free only when the ray left it at or before the hit
    // (each new cell's entry t is the previous cell's exit) AND the ray spent
    // a real chord inside it. A ray grazing a voxel edge steps through cells
    // of near-zero chord whose visit order is rounding noise; none of those
    // contain ray-confirmed free space.
    double pending_entry = 0.0;
    int near_entries = 0;
    traverseGrid(origin_, resolution_, entry, ray.dir, t1 - t0, [&](const Vec3i& cell, double tc) {
      if (!inBounds(cell)) return true;  // clip can leave a boundary-face cell at the ends
      if (pending >= 0 && (!hit || t0 + tc <= ray.range) && tc - pending_entry > kMinChord &&
          stamp_[pending] < free_tag) {
        stamp_[pending] = free_tag;
        touched.push_back(pending);
      }
      pending = linearIndex(cell);
      pending_entry = tc;
      if (hit && t0 + tc > ray.range - kMinChord) ++near_entries;
      return true;
    });
    if (pending < 0) continue;
    if (hit) {
      // The obstacle cell is the one the traversal occupies just past the hit,
      // but only when that is unambiguous: a hit square on a face enters one
      // cell there, while an edge graze skims several, and which of those the
      // rounding picks is noise. Grazes leave no occupied mark; some ray that
      // hits the surface square-on will supply it.
      if (near_entries <= 1 && stamp_[pending] != occ_tag) {
        if (stamp_[pending] < free_tag) touched.push_back(pending);
        stamp_[pending] = occ_tag;
      }
    } else if ((t1 - t0) - pending_entry > kMinChord && stamp_[pending] < free_tag) {
      stamp_[pending] = free_tag;
      touched.push_back(pending);
    }
  }

  // Canonical journal order regardless of ray layout.
  std::sort(touched.begin(), touched.end());

  Aabb changed;
  for (const std::int32_t i : touched) {
    applyState(i, stamp_[i] == occ_tag ? VoxelState::Occupied : VoxelState::Free, scan_id, changed);
  }
  return changed;
}

namespace {
constexpr int kFaceOffsets[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                    {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
}

int VoxelMap::neighbors6(const Vec3i& p, std::array<Vec3i, 6>& out) const {
  int n = 0;
  for (const auto& d : kFaceOffsets) {
    const Vec3i q{p.x() + d[0], p.y() + d[1], p.z() + d[2]};
    if (inBounds(q)) out[n++] = q;
  }
  return n;
}

int VoxelMap::neighbors26(const Vec3i& p, std::array<Vec3i, 26>& out) const {
  int n = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const Vec3i q{p.x() + dx, p.y() + dy, p.z() + dz};
        if (inBounds(q)) out[n++] = q;
      }
  return n;
}

std::vector<Vec3i> VoxelMap::neighbors6(const Vec3i& p) const {
  std::array<Vec3i, 6> buf;
  const int n = neighbors6(p, buf);
  return std::vector<Vec3i>(buf.begin(), buf.begin() + n);
}

std::vector<Vec3i> VoxelMap::neighbors26(const Vec3i& p) const {
  std::array<Vec3i, 26> buf;
  const int n = neighbors26(p, buf);
  return std::vector<Vec3i>(buf.begin(), buf.begin() + n);
}

bool VoxelMap::isFrontierVoxel(const Vec3i& p) const {
  if (!inBounds(p) || states_[linearIndex(p)] != VoxelState::Free) return false;
  if (p.x() > 0 && p.y() > 0 && p.z() > 0 && p.x() + 1 < dims_.x() && p.y() + 1 < dims_.y() &&
      p.z() + 1 < dims_.z()) {
    const std::int32_t v = linearIndex(p);
    const std::int32_t sy = dims_.x(), sz = dims_.x() * dims_.y();
    return states_[v - 1] == VoxelState::Unknown || states_[v + 1] == VoxelState::Unknown ||
           states_[v - sy] == VoxelState::Unknown || states_[v + sy] == VoxelState::Unknown ||
           states_[v - sz] == VoxelState::Unknown || states_[v + sz] == VoxelState::Unknown;
  }
  std::array<Vec3i, 6> nb;
  const int n = neighbors6(p, nb);
  for (int i = 0; i < n; ++i)
    if (states_[linearIndex(nb[i])] == VoxelState::Unknown) return true;
  return false;
}

const JournalEntry& VoxelMap::journalAt(std::uint64_t seq) const {
  if (seq < journal_base_ || seq >= journalEnd())
    throw std::out_of_range("journal sequence outside retained window");
  return journal_[static_cast<std::size_t>(seq - journal_base_)];
}

void VoxelMap::releaseJournal(std::uint64_t up_to) {
  if (up_to <= journal_base_) return;
  if (up_to > journalEnd()) up_to = journalEnd();
  journal_.erase(journal_.begin(),
                 journal_.begin() + static_cast<std::ptrdiff_t>(up_to - journal_base_));
  journal_base_ = up_to;
}

void VoxelMap::writeSnapshot(std::ostream& os) const {
  os << "fsmp-map v1\n";
  os << std::setprecision(17);
  os << "origin " << origin_.x() << " " << origin_.y() << " " << origin_.z() << "\n";
  os << "resolution " << resolution_ << "\n";
  os << "dims " << dims_.x() << " " << dims_.y() << " " << dims_.z() << "\n";
  os << "data\n";
  os.write(reinterpret_cast<const char*>(states_.data()),
           static_cast<std::streamsize>(states_.size()));
}

VoxelMap VoxelMap::readSnapshot(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "fsmp-map v1")
    throw std::runtime_error("snapshot: bad magic line");

  Vec3 origin = Vec3::Zero();
  double resolution = 0.0;
  Vec3i dims = Vec3i::Zero();
  bool have_origin = false, have_res = false, have_dims = false;

  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "origin") {
      ls >> origin.x() >> origin.y() >> origin.z();
      have_origin = !ls.fail();
    } else if (key == "resolution") {
      ls >> resolution;
      have_res = !ls.fail();
    } else if (key == "dims") {
      ls >> dims.x() >> dims.y() >> dims.z();
      have_dims = !ls.fail();
    } else if (key == "data") {
      break;
    } else {
      throw std::runtime_error("snapshot: unknown header field '" + key + "'");
    }
  }
  if (!have_origin || !have_res || !have_dims)
    throw std::runtime_error("snapshot: incomplete header");

  VoxelMap map(origin, resolution, dims);
  is.read(reinterpret_cast<char*>(map.states_.data()),
          static_cast<std::streamsize>(map.states_.size()));
  if (is.gcount() != static_cast<std::streamsize>(map.states_.size()))
    throw std::runtime_error("snapshot: truncated payload");

  map.state_counts_ = {0, 0, 0};
  for (const VoxelState s : map.states_) {
    const int v = static_cast<int>(s);
    if (v > 2) throw std::runtime_error("snapshot: voxel byte out of range");
    ++map.state_counts_[v];
  }
  return map;
}

}  // namespace fsmp
