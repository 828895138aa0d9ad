#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "handpose/error.hpp"
#include "handpose/image_io.hpp"
#include "handpose/manifest.hpp"
#include "handpose/rng.hpp"
#include "handpose/skeleton.hpp"
#include "handpose/synth.hpp"

using namespace handpose;

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Independent foreground bound: every raster pixel at or above one half.
BoundingBox raster_bounds(const Grid& raster) {
  int x_min = raster.width(), y_min = raster.height(), x_max = -1, y_max = -1;
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      if (raster.at(x, y) >= 0.5) {
        x_min = std::min(x_min, x);
        y_min = std::min(y_min, y);
        x_max = std::max(x_max, x);
        y_max = std::max(y_max, y);
      }
    }
  }
  REQUIRE(x_max >= 0);
  return {x_min, y_min, x_max, y_max};
}

}  // namespace

TEST_CASE("configuration knobs are range-checked") {
  SynthConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  SynthConfig bad = cfg;
  bad.count = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);

  bad = cfg;
  bad.resolution = 4;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);

  bad = cfg;
  bad.joint_count = 19;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);

  bad = cfg;
  bad.hand_absent_fraction = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);

  bad = cfg;
  bad.background_noise = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);

  bad = cfg;
  bad.absent_distractors = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);

  bad = cfg;
  bad.train_fraction = 0.8;
  bad.val_fraction = 0.3;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
}

TEST_CASE("the canonical hand stays near the unit frame with the wrist first") {
  const JointSet full = hand_template(21);
  REQUIRE(full.size() == 21);
  CHECK(full[0].x == 0.0);
  CHECK(full[0].y == 0.5);

  const JointSet no_palm = hand_template(20);
  REQUIRE(no_palm.size() == 20);

  for (const Keypoint& j : full) {
    CHECK(std::fabs(j.x) <= 1.2);
    CHECK(std::fabs(j.y) <= 1.2);
  }
  CHECK_THROWS_AS(hand_template(19), InvalidInputError);
}

TEST_CASE("sampled poses keep every joint inside the image") {
  SynthConfig cfg;
  cfg.resolution = 128;
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const JointSet pose = sample_hand_pose(cfg, rng);
    REQUIRE(pose.size() == 21);
    for (const Keypoint& j : pose) {
      CHECK(j.x >= 0.0);
      CHECK(j.x <= 127.0);
      CHECK(j.y >= 0.0);
      CHECK(j.y <= 127.0);
    }
  }

  Rng a(5), b(5);
  const JointSet pa = sample_hand_pose(cfg, a);
  const JointSet pb = sample_hand_pose(cfg, b);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].x == pb[i].x);
    CHECK(pa[i].y == pb[i].y);
  }
}

TEST_CASE("rendered hands carry the clean raster's foreground box") {
  SynthConfig cfg;
  cfg.resolution = 64;
  const RasterSpec spec = scale_raster_spec(cfg.raster, cfg.resolution);
  const HandTopology topo = default_hand_topology(cfg.joint_count);

  Rng rng(23);
  for (int i = 0; i < 5; ++i) {
    const JointSet pose = sample_hand_pose(cfg, rng);
    SynthSample sample = render_sample(cfg, &pose, rng);

    CHECK(sample.hand_present);
    REQUIRE(sample.bbox.has_value());
    REQUIRE(sample.joints.size() == 21);
    CHECK(sample.image.width == 64);
    CHECK(sample.image.channels == 3);

    const SkeletonImage raster = rasterize_skeleton(pose, topo, 64, 64, spec);
    CHECK(*sample.bbox == raster_bounds(raster));
  }
}

TEST_CASE("hand-free renders have distractor clutter but no annotations") {
  SynthConfig cfg;
  cfg.resolution = 64;
  cfg.absent_distractors = 3;
  Rng rng(29);
  const SynthSample sample = render_sample(cfg, nullptr, rng);
  CHECK_FALSE(sample.hand_present);
  CHECK(sample.joints.empty());
  CHECK_FALSE(sample.bbox.has_value());

  // Background tops out at noise + base < 0.5; only distractors are brighter.
  const std::vector<Grid> planes = to_planes(sample.image);
  double brightest = 0.0;
  for (double v : planes[0].values()) brightest = std::max(brightest, v);
  CHECK(brightest > 0.5);
}

TEST_CASE("noise segments brighten pixels monotonically and clip off-image spans") {
  Grid img(16, 16, 0.3);
  draw_noise_segment(img, {2.0, 8.0}, {13.0, 8.0}, 1, 0.9);
  for (int x = 2; x <= 13; ++x) CHECK(img.at(x, 8) == 0.9);
  CHECK(img.at(0, 0) == 0.3);

  // Stamping never darkens an already-bright pixel.
  draw_noise_segment(img, {2.0, 8.0}, {13.0, 8.0}, 1, 0.1);
  for (int x = 2; x <= 13; ++x) CHECK(img.at(x, 8) == 0.9);

  Grid clipped(8, 8, 0.0);
  CHECK_NOTHROW(draw_noise_segment(clipped, {-20.0, 4.0}, {30.0, 4.0}, 3, 1.0));
  CHECK(clipped.at(4, 4) == 1.0);
}

TEST_CASE("dataset generation is reproducible byte for byte") {
  SynthConfig cfg;
  cfg.count = 12;
  cfg.resolution = 32;
  cfg.hand_absent_fraction = 0.25;
  cfg.seed = 99;

  const std::string dir_a = "synth_a";
  const std::string dir_b = "synth_b";
  const DatasetManifest ma = generate_synthetic_dataset(cfg, dir_a);
  const DatasetManifest mb = generate_synthetic_dataset(cfg, dir_b);

  CHECK(ma == mb);
  const DatasetManifest loaded_a = load_manifest(dir_a + "/manifest.txt");
  const DatasetManifest loaded_b = load_manifest(dir_b + "/manifest.txt");
  CHECK(loaded_a == loaded_b);
  CHECK(loaded_a == ma);

  for (const AnnotationRecord& record : ma.records) {
    CHECK(read_bytes(std::filesystem::path(dir_a) / record.image_path) ==
          read_bytes(std::filesystem::path(dir_b) / record.image_path));
  }

  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("a 200-sample set honors the split fractions and per-record invariants") {
  SynthConfig cfg;
  cfg.count = 200;
  cfg.resolution = 32;
  cfg.hand_absent_fraction = 0.25;
  cfg.seed = 7;

  const std::string dir = "synth_200";
  const DatasetManifest manifest = generate_synthetic_dataset(cfg, dir);
  REQUIRE(manifest.records.size() == 200);
  CHECK(manifest.joint_count == 21);

  int train = 0, val = 0, test = 0, absent = 0;
  for (const AnnotationRecord& record : manifest.records) {
    if (record.split == "train") ++train;
    else if (record.split == "val") ++val;
    else ++test;

    if (record.hand_present) {
      CHECK(record.joints2d.size() == 21);
      REQUIRE(record.bbox.has_value());
      CHECK(record.bbox->valid());
      CHECK(record.bbox->x_min >= 0);
      CHECK(record.bbox->y_min >= 0);
      CHECK(record.bbox->x_max < 32);
      CHECK(record.bbox->y_max < 32);
      for (const Keypoint& j : record.joints2d) {
        CHECK(j.x >= 0.0);
        CHECK(j.x <= 31.0);
        CHECK(j.y >= 0.0);
        CHECK(j.y <= 31.0);
      }
    } else {
      ++absent;
      CHECK(record.joints2d.empty());
      CHECK_FALSE(record.bbox.has_value());
    }

    // Every referenced image exists and decodes at the stated resolution.
    const ImageBuffer image = read_image((std::filesystem::path(dir) / record.image_path).string());
    CHECK(image.width == record.width);
    CHECK(image.height == record.height);
    CHECK(image.channels == 3);
  }

  CHECK(train == 150);
  CHECK(val == 20);
  CHECK(test == 30);
  CHECK(absent == 50);

  std::filesystem::remove_all(dir);
}
