#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "handpose/detector.hpp"
#include "handpose/heatmap.hpp"
#include "handpose/rng.hpp"

using namespace handpose;

namespace {

// Independent oracle: brute-force 4-connected flood fill by repeated scanning.
std::vector<std::vector<Pixel>> flood_fill_oracle(const BinaryMask& mask) {
  std::vector<int> label(static_cast<std::size_t>(mask.width) * mask.height, -1);
  const auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * mask.width + x; };
  int next = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y) || label[idx(x, y)] != -1) continue;
      // Expand by fixpoint iteration: mark, then sweep until stable.
      label[idx(x, y)] = next;
      bool changed = true;
      while (changed) {
        changed = false;
        for (int v = 0; v < mask.height; ++v) {
          for (int u = 0; u < mask.width; ++u) {
            if (!mask.at(u, v) || label[idx(u, v)] != next) continue;
            const int du[4] = {1, -1, 0, 0};
            const int dv[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
              const int nu = u + du[d], nv = v + dv[d];
              if (nu < 0 || nu >= mask.width || nv < 0 || nv >= mask.height) continue;
              if (mask.at(nu, nv) && label[idx(nu, nv)] == -1) {
                label[idx(nu, nv)] = next;
                changed = true;
              }
            }
          }
        }
      }
      ++next;
    }
  }
  std::vector<std::vector<Pixel>> components(next);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) components[label[idx(x, y)]].push_back({x, y});
    }
  }
  return components;
}

BinaryMask random_mask(int width, int height, double density, Rng& rng) {
  BinaryMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.assign(static_cast<std::size_t>(width) * height, 0);
  for (auto& bit : mask.bits) bit = rng.uniform() < density ? 1 : 0;
  return mask;
}

}  // namespace

TEST_CASE("binarize applies the >= rule") {
  SkeletonImage img(4, 1, 0.0);
  img.at(0, 0) = 0.49;
  img.at(1, 0) = 0.5;
  img.at(2, 0) = 0.51;
  const BinaryMask mask = binarize(img, 0.5);
  CHECK(mask.at(0, 0) == 0);
  CHECK(mask.at(1, 0) == 1);
  CHECK(mask.at(2, 0) == 1);
  CHECK(mask.at(3, 0) == 0);

  const BinaryMask zero = binarize(SkeletonImage(5, 5, 0.0), 0.5);
  CHECK(std::count(zero.bits.begin(), zero.bits.end(), 1) == 0);

  CHECK_THROWS_AS(binarize(img, 0.0), InvalidInputError);
  CHECK_THROWS_AS(binarize(img, 1.0), InvalidInputError);
}

TEST_CASE("binarized gaussian blob is a half-maximum disk") {
  GaussianSpec spec;
  spec.sigma = 2.0;
  spec.reference_resolution = 32.0;  // keep sigma exactly 2 on a 32-wide map
  const Heatmap blob = encode_joint({16.0, 16.0}, 32, 32, spec);
  const BinaryMask mask = binarize(blob, 0.5);
  const double radius = 2.0 * std::sqrt(2.0 * std::log(2.0));
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const double r = std::hypot(x - 16.0, y - 16.0);
      CHECK(mask.at(x, y) == (r <= radius + 1e-9 ? 1 : 0));
    }
  }
}

TEST_CASE("region growing matches the worked 3x5 example") {
  BinaryMask mask;
  mask.width = 5;
  mask.height = 3;
  mask.bits.assign(15, 0);
  // (row,col) foreground: (0,1),(0,2),(1,1),(2,3)
  mask.at(1, 0) = 1;
  mask.at(2, 0) = 1;
  mask.at(1, 1) = 1;
  mask.at(3, 2) = 1;
  const std::vector<Region> regions = region_grow(mask);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].size() == 3);
  CHECK(regions[1].size() == 1);
  CHECK(regions[1][0] == Pixel{3, 2});
}

TEST_CASE("full-foreground mask is one component") {
  BinaryMask mask;
  mask.width = 6;
  mask.height = 4;
  mask.bits.assign(24, 1);
  const std::vector<Region> regions = region_grow(mask);
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].size() == 24);
}

TEST_CASE("diagonal touch does not connect under 4-connectivity") {
  BinaryMask mask;
  mask.width = 3;
  mask.height = 3;
  mask.bits.assign(9, 0);
  mask.at(0, 0) = 1;
  mask.at(1, 1) = 1;
  CHECK(region_grow(mask).size() == 2);
}

TEST_CASE("empty mask yields no components") {
  BinaryMask mask;
  mask.width = 3;
  mask.height = 3;
  mask.bits.assign(9, 0);
  CHECK(region_grow(mask).empty());
}

TEST_CASE("region growing equals the brute-force oracle on random masks") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const BinaryMask mask = random_mask(32, 32, rng.uniform(0.05, 0.8), rng);
    const std::vector<Region> got = region_grow(mask);
    const auto expected = flood_fill_oracle(mask);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].size() == expected[i].size());
      for (std::size_t p = 0; p < got[i].size(); ++p) REQUIRE(got[i][p] == expected[i][p]);
    }
  }
}

TEST_CASE("components partition the foreground") {
  Rng rng(5);
  const BinaryMask mask = random_mask(24, 18, 0.4, rng);
  const std::vector<Region> regions = region_grow(mask);
  std::set<std::pair<int, int>> seen;
  std::size_t total = 0;
  for (const Region& region : regions) {
    for (const Pixel& p : region) {
      CHECK(mask.at(p.x, p.y) == 1);
      CHECK(seen.emplace(p.x, p.y).second);
    }
    total += region.size();
  }
  CHECK(total == static_cast<std::size_t>(std::count(mask.bits.begin(), mask.bits.end(), 1)));
}

TEST_CASE("bbox of a region is the inclusive min/max") {
  // (row,col): (0,1),(0,2),(1,1)
  const Region region{{1, 0}, {2, 0}, {1, 1}};
  const BoundingBox box = bbox_of_region(region);
  CHECK(box.x_min == 1);
  CHECK(box.y_min == 0);
  CHECK(box.x_max == 2);
  CHECK(box.y_max == 1);

  const BoundingBox single = bbox_of_region({{4, 3}});
  CHECK(single == BoundingBox{4, 3, 4, 3});

  CHECK_THROWS_AS(bbox_of_region({}), InvalidInputError);
}

TEST_CASE("region boxes are monotone under union") {
  const Region a{{1, 1}, {2, 2}};
  const Region b{{7, 5}};
  Region both = a;
  both.insert(both.end(), b.begin(), b.end());
  const BoundingBox ba = bbox_of_region(a);
  const BoundingBox bb = bbox_of_region(b);
  const BoundingBox bu = bbox_of_region(both);
  CHECK(bu.x_min == std::min(ba.x_min, bb.x_min));
  CHECK(bu.y_min == std::min(ba.y_min, bb.y_min));
  CHECK(bu.x_max == std::max(ba.x_max, bb.x_max));
  CHECK(bu.y_max == std::max(ba.y_max, bb.y_max));
}

TEST_CASE("presence decision counts total foreground and boxes the largest region") {
  SkeletonImage img(40, 40, 0.0);
  // Region A: 5x8 = 40 px; region B: 20x25 = 500 px, disjoint.
  for (int y = 1; y <= 8; ++y) {
    for (int x = 1; x <= 5; ++x) img.at(x, y) = 1.0;
  }
  for (int y = 12; y <= 36; ++y) {
    for (int x = 15; x <= 34; ++x) img.at(x, y) = 0.9;
  }
  DetectorThresholds th;
  th.foreground_threshold = 0.5;
  th.presence_count = 300;
  const DetectionDecision d = decide_hand_presence(img, th);
  CHECK(d.hand_present);
  CHECK(d.foreground_pixels == 540);
  REQUIRE(d.bbox.has_value());
  CHECK(*d.bbox == BoundingBox{15, 12, 34, 36});

  th.presence_count = 541;
  const DetectionDecision none = decide_hand_presence(img, th);
  CHECK_FALSE(none.hand_present);
  CHECK_FALSE(none.bbox.has_value());
  CHECK(none.foreground_pixels == 540);
}

TEST_CASE("blank image is never a hand") {
  DetectorThresholds th;
  th.presence_count = 1;
  const DetectionDecision d = decide_hand_presence(SkeletonImage(16, 16, 0.0), th);
  CHECK_FALSE(d.hand_present);
  CHECK(d.foreground_pixels == 0);
  CHECK_FALSE(d.bbox.has_value());
}

TEST_CASE("raising presence_count never turns a miss into a hit") {
  Rng rng(13);
  SkeletonImage img(24, 24, 0.0);
  for (double& v : img.values()) v = rng.uniform();
  DetectorThresholds th;
  bool prev = true;
  for (int count = 1; count < 600; count += 7) {
    th.presence_count = count;
    const bool now = decide_hand_presence(img, th).hand_present;
    CHECK((prev || !now));
    prev = now;
  }
}

TEST_CASE("crop of the full image at native size is the identity") {
  Rng rng(3);
  Grid plane(16, 16, 0.0);
  for (double& v : plane.values()) v = rng.uniform();
  const CropResult crop = crop_and_resize({plane}, {0, 0, 15, 15}, 16, 0.0);
  REQUIRE(crop.channels.size() == 1);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x)
      CHECK(crop.channels[0].at(x, y) == doctest::Approx(plane.at(x, y)).epsilon(1e-12));
  }
  const Keypoint mapped = crop.transform.apply({7.0, 9.0});
  CHECK(mapped.x == doctest::Approx(7.0));
  CHECK(mapped.y == doctest::Approx(9.0));
}

TEST_CASE("quadrant crop extracts the top-left quadrant") {
  Grid plane(128, 128, 0.0);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) plane.at(x, y) = (x + 128.0 * y) / (128.0 * 128.0);
  }
  const CropResult crop = crop_and_resize({plane}, {0, 0, 63, 63}, 64, 0.0);
  REQUIRE(crop.channels.size() == 1);
  CHECK(crop.expanded_box == BoundingBox{0, 0, 63, 63});
  // Corner-aligned 64-for-64 resize of the quadrant samples fractional
  // source positions; corners are exact.
  CHECK(crop.channels[0].at(0, 0) == doctest::Approx(plane.at(0, 0)).epsilon(1e-12));
  CHECK(crop.channels[0].at(63, 63) == doctest::Approx(plane.at(63, 63)).epsilon(1e-12));
}

TEST_CASE("box center maps to the crop center") {
  Grid plane(100, 80, 0.3);
  const BoundingBox box{20, 10, 59, 49};
  const CropResult crop = crop_and_resize({plane}, box, 64, 0.25);
  const Keypoint center = crop.transform.apply({(20.0 + 59.0) / 2.0, (10.0 + 49.0) / 2.0});
  CHECK(std::abs(center.x - 32.0) <= 0.5);
  CHECK(std::abs(center.y - 32.0) <= 0.5);
  const Keypoint back = crop.transform.invert(center);
  CHECK(back.x == doctest::Approx((20.0 + 59.0) / 2.0).epsilon(1e-9));
  CHECK(back.y == doctest::Approx((10.0 + 49.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("margins clamp at the image border") {
  Grid plane(32, 32, 1.0);
  const CropResult crop = crop_and_resize({plane}, {0, 0, 10, 10}, 16, 0.5);
  CHECK(crop.expanded_box.x_min == 0);
  CHECK(crop.expanded_box.y_min == 0);
  CHECK(crop.expanded_box.x_max <= 31);
  CHECK(crop.expanded_box.y_max <= 31);
}

TEST_CASE("crop validation errors") {
  Grid plane(16, 16, 0.0);
  CHECK_THROWS_AS(crop_and_resize({}, {0, 0, 3, 3}, 8, 0.0), InvalidInputError);
  CHECK_THROWS_AS(crop_and_resize({plane}, {4, 4, 2, 2}, 8, 0.0), InvalidInputError);
  CHECK_THROWS_AS(crop_and_resize({plane}, {0, 0, 3, 3}, 0, 0.0), InvalidInputError);
  CHECK_THROWS_AS(crop_and_resize({plane}, {0, 0, 3, 3}, 8, -0.1), InvalidInputError);
  CHECK_THROWS_AS(crop_and_resize({plane}, {40, 40, 50, 50}, 8, 0.0), InvalidInputError);
  CHECK_THROWS_AS(crop_and_resize({plane, Grid(8, 8)}, {0, 0, 3, 3}, 8, 0.0), ShapeError);
}
