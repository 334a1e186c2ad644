#pragma once

#include <fsmp/types.hpp>

#include <vector>

namespace fsmp {

// One depth measurement. Rays shorter than the sensor's near limit are
// reported as Invalid and update nothing when integrated.
struct DepthRay {
  enum class Kind : std::uint8_t { Miss = 0, Hit = 1, Invalid = 2 };
  Vec3 dir;        // unit direction
  double range;    // hit distance, valid iff kind == Hit
  Kind kind;
};

struct DepthScan {
  Vec3 origin;
  double min_range = 0.0;
  double max_range = 0.0;
  std::vector<DepthRay> rays;
};

}  // namespace fsmp
