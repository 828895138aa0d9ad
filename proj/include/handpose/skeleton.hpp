#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

// Joint connectivity of one hand: five root-to-tip finger chains plus the
// palm attachment edges. For 21 joints, joint 0 is the palm/wrist and each
// finger root connects to it; for 20 joints there is no dedicated palm joint
// and finger roots are chained pairwise in finger order.
struct HandTopology {
  int joint_count = 0;
  std::optional<int> palm_index;
  std::array<std::vector<int>, 5> fingers;        // root -> tip
  std::vector<std::pair<int, int>> edges;
};

HandTopology default_hand_topology(int joint_count);

struct RasterSpec {
  int line_thickness = 3;   // px, >= 1
  double blob_sigma = 2.0;  // px, > 0
};

// RasterSpec values are quoted at reference resolution 128; this scales them
// proportionally for another working resolution (thickness never drops
// below 1 px).
RasterSpec scale_raster_spec(const RasterSpec& spec, int resolution);

// Ground-truth skeleton image: every bone drawn as a thickness-dilated
// Bresenham line at value 1, composed by pointwise max with a Gaussian blob
// (amplitude 1) at every joint. Off-image geometry is clipped.
SkeletonImage rasterize_skeleton(const JointSet& joints, const HandTopology& topology, int width,
                                 int height, const RasterSpec& spec);

}  // namespace handpose
