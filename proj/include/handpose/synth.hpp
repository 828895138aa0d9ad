#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "handpose/grid.hpp"
#include "handpose/image_io.hpp"
#include "handpose/manifest.hpp"
#include "handpose/rng.hpp"
#include "handpose/skeleton.hpp"

namespace handpose {

// Synthetic dataset knobs. Raster geometry is given at reference resolution
// 128 and scales proportionally with cfg.resolution.
struct SynthConfig {
  int count = 200;
  int resolution = 128;
  int joint_count = 21;
  std::uint64_t seed = 0;
  double hand_absent_fraction = 0.0;
  double background_noise = 0.2;  // value-noise amplitude in [0,1)
  int absent_distractors = 3;     // bright segments drawn in hand-absent images
  RasterSpec raster{};
  double train_fraction = 0.75;
  double val_fraction = 0.10;  // test takes the remainder

  void validate() const;
};

// Canonical upright hand in a unit frame (y grows downward), ordered to
// match default_hand_topology.
JointSet hand_template(int joint_count);

// Template under a random similarity transform plus bounded per-joint
// jitter; every joint stays inside the image.
JointSet sample_hand_pose(const SynthConfig& cfg, Rng& rng);

struct SynthSample {
  ImageBuffer image;  // RGB render
  JointSet joints;    // empty when no hand
  bool hand_present = false;
  std::optional<BoundingBox> bbox;  // foreground bounds of the clean raster
};

// Renders one sample: skeleton raster over a textured noise background, or
// noise plus distractor segments when joints is null.
SynthSample render_sample(const SynthConfig& cfg, const JointSet* joints, Rng& rng);

// Stamps a bright segment with a square brush; used for distractor clutter
// and skeleton corruption.
void draw_noise_segment(Grid& img, const Keypoint& a, const Keypoint& b, int thickness,
                        double value);

// Writes images and a manifest into out_dir and returns the manifest.
// Records carry exact ground truth; splits follow the configured fractions.
DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace handpose
