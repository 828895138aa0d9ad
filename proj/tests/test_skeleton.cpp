#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "handpose/skeleton.hpp"

using namespace handpose;

namespace {

HandTopology segment_topology(int joint_count, std::vector<std::pair<int, int>> edges) {
  HandTopology topo;
  topo.joint_count = joint_count;
  topo.edges = std::move(edges);
  return topo;
}

int foreground_count(const SkeletonImage& img, double threshold = 0.5) {
  int count = 0;
  for (double v : img.values()) count += v >= threshold;
  return count;
}

}  // namespace

TEST_CASE("21-joint topology: palm joint plus five 4-joint fingers, 20 edges") {
  const HandTopology topo = default_hand_topology(21);
  CHECK(topo.joint_count == 21);
  REQUIRE(topo.palm_index.has_value());
  CHECK(*topo.palm_index == 0);
  for (const auto& finger : topo.fingers) CHECK(finger.size() == 4);
  CHECK(topo.edges.size() == 20);

  int palm_edges = 0;
  for (const auto& [a, b] : topo.edges) {
    CHECK(a >= 0);
    CHECK(a < 21);
    CHECK(b >= 0);
    CHECK(b < 21);
    palm_edges += (a == 0 || b == 0);
  }
  CHECK(palm_edges == 5);
}

TEST_CASE("20-joint topology chains finger roots, 19 edges") {
  const HandTopology topo = default_hand_topology(20);
  CHECK(topo.joint_count == 20);
  CHECK_FALSE(topo.palm_index.has_value());
  for (const auto& finger : topo.fingers) CHECK(finger.size() == 4);
  CHECK(topo.edges.size() == 19);
  for (const auto& [a, b] : topo.edges) {
    CHECK(a >= 0);
    CHECK(a < 20);
    CHECK(b >= 0);
    CHECK(b < 20);
  }
}

TEST_CASE("each joint belongs to at most one finger chain") {
  for (int k : {20, 21}) {
    const HandTopology topo = default_hand_topology(k);
    std::set<int> seen;
    for (const auto& finger : topo.fingers) {
      for (int j : finger) {
        CHECK(seen.insert(j).second);
      }
    }
  }
}

TEST_CASE("unsupported joint counts are rejected") {
  CHECK_THROWS_AS(default_hand_topology(19), InvalidInputError);
  CHECK_THROWS_AS(default_hand_topology(22), InvalidInputError);
  CHECK_THROWS_AS(default_hand_topology(0), InvalidInputError);
}

TEST_CASE("horizontal segment rasterizes the exact bresenham pixels") {
  RasterSpec spec;
  spec.line_thickness = 1;
  spec.blob_sigma = 1e-6;  // blobs vanish away from the joints
  const JointSet joints{{0.0, 0.0}, {3.0, 0.0}};
  const SkeletonImage img = rasterize_skeleton(joints, segment_topology(2, {{0, 1}}), 8, 8, spec);
  for (int x = 0; x <= 3; ++x) CHECK(img.at(x, 0) == 1.0);
  CHECK(img.at(4, 0) < 0.5);
  CHECK(img.at(0, 1) < 0.5);
  CHECK(img.at(5, 5) == 0.0);
}

TEST_CASE("zero edges leaves only the joint blobs") {
  RasterSpec spec;
  spec.line_thickness = 1;
  spec.blob_sigma = 1.5;
  const JointSet joints{{2.0, 2.0}, {9.0, 9.0}};
  const SkeletonImage img = rasterize_skeleton(joints, segment_topology(2, {}), 12, 12, spec);
  CHECK(img.at(2, 2) == 1.0);
  CHECK(img.at(9, 9) == 1.0);
  // Mid-segment pixels would be 1.0 with an edge; they fall off as gaussians.
  CHECK(img.at(5, 5) < 0.1);
}

TEST_CASE("values stay in [0,1] and thicker lines cover a superset") {
  RasterSpec thin, thick;
  thin.line_thickness = 1;
  thick.line_thickness = 3;
  const JointSet joints{{3.0, 4.0}, {20.0, 17.0}, {8.0, 25.0}};
  const HandTopology topo = segment_topology(3, {{0, 1}, {1, 2}});
  const SkeletonImage a = rasterize_skeleton(joints, topo, 32, 32, thin);
  const SkeletonImage b = rasterize_skeleton(joints, topo, 32, 32, thick);
  for (double v : a.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (a.at(x, y) >= 0.5) CHECK(b.at(x, y) >= 0.5);
    }
  }
  CHECK(foreground_count(b) > foreground_count(a));
}

TEST_CASE("mirroring integer joints mirrors the raster") {
  RasterSpec spec;
  spec.line_thickness = 1;
  spec.blob_sigma = 1.0;
  const int w = 17;
  const JointSet joints{{3.0, 2.0}, {13.0, 12.0}};
  JointSet mirrored;
  for (const Keypoint& j : joints) mirrored.push_back({w - 1 - j.x, j.y});
  const HandTopology topo = segment_topology(2, {{0, 1}});
  const SkeletonImage img = rasterize_skeleton(joints, topo, w, 17, spec);
  const SkeletonImage mir = rasterize_skeleton(mirrored, topo, w, 17, spec);
  for (int y = 0; y < 17; ++y) {
    for (int x = 0; x < w; ++x)
      CHECK(img.at(x, y) == doctest::Approx(mir.at(w - 1 - x, y)).epsilon(1e-12));
  }
}

TEST_CASE("coincident endpoints draw only the blob") {
  RasterSpec spec;
  spec.line_thickness = 3;
  spec.blob_sigma = 0.5;
  const JointSet joints{{6.0, 6.0}, {6.0, 6.0}};
  const SkeletonImage img = rasterize_skeleton(joints, segment_topology(2, {{0, 1}}), 13, 13, spec);
  CHECK(img.at(6, 6) == 1.0);
  // A real 3-px segment stamp would set the whole 3x3 block to 1.0.
  CHECK(img.at(7, 7) < 0.5);
}

TEST_CASE("off-image segments clip without error") {
  RasterSpec spec;
  spec.line_thickness = 1;
  spec.blob_sigma = 0.5;
  const JointSet joints{{-50.0, 4.0}, {50.0, 4.0}};
  const SkeletonImage img = rasterize_skeleton(joints, segment_topology(2, {{0, 1}}), 9, 9, spec);
  for (int x = 0; x < 9; ++x) CHECK(img.at(x, 4) == 1.0);

  const JointSet far{{-100.0, -100.0}, {-90.0, -120.0}};
  const SkeletonImage empty = rasterize_skeleton(far, segment_topology(2, {{0, 1}}), 9, 9, spec);
  for (double v : empty.values()) CHECK(v == 0.0);
}

TEST_CASE("raster input validation") {
  RasterSpec bad_thickness;
  bad_thickness.line_thickness = 0;
  const JointSet joints{{1.0, 1.0}, {2.0, 2.0}};
  const HandTopology topo = segment_topology(2, {{0, 1}});
  CHECK_THROWS_AS(rasterize_skeleton(joints, topo, 8, 8, bad_thickness), InvalidInputError);

  RasterSpec bad_sigma;
  bad_sigma.blob_sigma = 0.0;
  CHECK_THROWS_AS(rasterize_skeleton(joints, topo, 8, 8, bad_sigma), InvalidInputError);

  CHECK_THROWS_AS(rasterize_skeleton({{1.0, 1.0}}, topo, 8, 8, RasterSpec{}), ShapeError);
}

TEST_CASE("raster spec scales from the 128 reference resolution") {
  RasterSpec spec;
  spec.line_thickness = 3;
  spec.blob_sigma = 2.0;
  const RasterSpec at64 = scale_raster_spec(spec, 64);
  CHECK(at64.line_thickness == 2);  // round(1.5) away from zero
  CHECK(at64.blob_sigma == doctest::Approx(1.0));
  const RasterSpec at128 = scale_raster_spec(spec, 128);
  CHECK(at128.line_thickness == 3);
  CHECK(at128.blob_sigma == doctest::Approx(2.0));
  const RasterSpec tiny = scale_raster_spec(spec, 8);
  CHECK(tiny.line_thickness >= 1);
  CHECK(tiny.blob_sigma > 0.0);
}

TEST_CASE("binarized gaussian blob is the half-maximum disk") {
  RasterSpec spec;
  spec.line_thickness = 1;
  spec.blob_sigma = 2.0;
  const JointSet joints{{16.0, 16.0}};
  HandTopology topo;
  topo.joint_count = 1;
  const SkeletonImage img = rasterize_skeleton(joints, topo, 33, 33, spec);
  const double radius = 2.0 * std::sqrt(2.0 * std::log(2.0));  // ~2.355
  for (int y = 10; y <= 22; ++y) {
    for (int x = 10; x <= 22; ++x) {
      const double r = std::hypot(x - 16.0, y - 16.0);
      if (r < radius - 1e-9) CHECK(img.at(x, y) >= 0.5);
      if (r > radius + 1e-9) CHECK(img.at(x, y) < 0.5);
    }
  }
}
