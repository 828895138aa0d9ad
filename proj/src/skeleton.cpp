#include "handpose/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "handpose/error.hpp"

namespace handpose {

HandTopology default_hand_topology(int joint_count) {
  if (joint_count != 20 && joint_count != 21) {
    throw InvalidInputError("default_hand_topology: joint count must be 20 or 21, got " +
                            std::to_string(joint_count));
  }
  HandTopology topo;
  topo.joint_count = joint_count;
  const int first_finger_joint = (joint_count == 21) ? 1 : 0;
  if (joint_count == 21) topo.palm_index = 0;

  for (int f = 0; f < 5; ++f) {
    std::vector<int>& chain = topo.fingers[f];
    for (int j = 0; j < 4; ++j) chain.push_back(first_finger_joint + 4 * f + j);
    for (int j = 0; j + 1 < 4; ++j) topo.edges.emplace_back(chain[j], chain[j + 1]);
  }
  if (topo.palm_index) {
    for (int f = 0; f < 5; ++f) topo.edges.emplace_back(*topo.palm_index, topo.fingers[f].front());
  } else {
    for (int f = 0; f + 1 < 5; ++f) {
      topo.edges.emplace_back(topo.fingers[f].front(), topo.fingers[f + 1].front());
    }
  }
  return topo;
}

RasterSpec scale_raster_spec(const RasterSpec& spec, int resolution) {
  RasterSpec out;
  out.line_thickness =
      std::max(1, static_cast<int>(std::lround(spec.line_thickness * resolution / 128.0)));
  out.blob_sigma = std::max(0.25, spec.blob_sigma * resolution / 128.0);
  return out;
}

namespace {

// Stamps value 1 in a disk of diameter `thickness` around the pixel.
void stamp(SkeletonImage& img, int cx, int cy, const std::vector<std::pair<int, int>>& offsets) {
  for (const auto& [dx, dy] : offsets) {
    const int x = cx + dx;
    const int y = cy + dy;
    if (img.in_bounds(x, y)) img.at(x, y) = 1.0;
  }
}

std::vector<std::pair<int, int>> disk_offsets(int thickness) {
  const double radius_sq = 0.25 * thickness * thickness;
  const int reach = thickness / 2;
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      if (dx * dx + dy * dy <= radius_sq) offsets.emplace_back(dx, dy);
    }
  }
  return offsets;
}

// Liang-Barsky clip of the segment (a,b) against a rectangle grown by
// `margin` around the image, so Bresenham never walks far outside it.
// Returns false when the segment misses the rectangle entirely.
bool clip_segment(const SkeletonImage& img, int margin, double& ax, double& ay, double& bx,
                  double& by) {
  const double lo_x = -margin, hi_x = img.width() - 1 + margin;
  const double lo_y = -margin, hi_y = img.height() - 1 + margin;
  const double dx = bx - ax;
  const double dy = by - ay;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {ax - lo_x, hi_x - ax, ay - lo_y, hi_y - ay};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        if (r > t1) return false;
        if (r > t0) t0 = r;
      } else {
        if (r < t0) return false;
        if (r < t1) t1 = r;
      }
    }
  }
  const double nax = ax + t0 * dx, nay = ay + t0 * dy;
  bx = ax + t1 * dx;
  by = ay + t1 * dy;
  ax = nax;
  ay = nay;
  return true;
}

void draw_line(SkeletonImage& img, int x0, int y0, int x1, int y1,
               const std::vector<std::pair<int, int>>& offsets) {
  // Bresenham, endpoints inclusive.
  int dx = std::abs(x1 - x0);
  int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0;
  int y = y0;
  while (true) {
    stamp(img, x, y, offsets);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace

SkeletonImage rasterize_skeleton(const JointSet& joints, const HandTopology& topology, int width,
                                 int height, const RasterSpec& spec) {
  if (static_cast<int>(joints.size()) != topology.joint_count) {
    throw ShapeError("rasterize_skeleton: joint count does not match topology");
  }
  if (spec.line_thickness < 1) throw InvalidInputError("rasterize_skeleton: thickness must be >= 1");
  if (!(spec.blob_sigma > 0.0)) throw InvalidInputError("rasterize_skeleton: sigma must be > 0");

  SkeletonImage img(width, height, 0.0);
  const std::vector<std::pair<int, int>> offsets = disk_offsets(spec.line_thickness);

  for (const auto& [a, b] : topology.edges) {
    double ax = joints[a].x, ay = joints[a].y;
    double bx = joints[b].x, by = joints[b].y;
    if (!clip_segment(img, spec.line_thickness + 1, ax, ay, bx, by)) continue;
    const int x0 = static_cast<int>(std::llround(ax));
    const int y0 = static_cast<int>(std::llround(ay));
    const int x1 = static_cast<int>(std::llround(bx));
    const int y1 = static_cast<int>(std::llround(by));
    if (x0 == x1 && y0 == y1 && joints[a].x == joints[b].x && joints[a].y == joints[b].y) {
      continue;  // degenerate edge, the blob covers it
    }
    draw_line(img, x0, y0, x1, y1, offsets);
  }

  const double inv_two_sigma_sq = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);
  // Gaussians fall below 1e-12 past ~7.5 sigma; only touch pixels near each joint.
  const int reach = static_cast<int>(std::ceil(8.0 * spec.blob_sigma)) + 1;
  for (const Keypoint& joint : joints) {
    if (joint.x < -2.0 * reach || joint.x > width + 2.0 * reach || joint.y < -2.0 * reach ||
        joint.y > height + 2.0 * reach) {
      continue;  // blob entirely off-image
    }
    const int cx = static_cast<int>(std::llround(joint.x));
    const int cy = static_cast<int>(std::llround(joint.y));
    for (int y = std::max(0, cy - reach); y <= std::min(height - 1, cy + reach); ++y) {
      const double dy = y - joint.y;
      for (int x = std::max(0, cx - reach); x <= std::min(width - 1, cx + reach); ++x) {
        const double dx = x - joint.x;
        const double v = std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
        if (v > img.at(x, y)) img.at(x, y) = v;
      }
    }
  }
  return img;
}

}  // namespace handpose
