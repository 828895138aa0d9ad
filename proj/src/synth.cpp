#include "handpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "handpose/detector.hpp"
#include "handpose/error.hpp"

namespace handpose {

void SynthConfig::validate() const {
  if (count < 1) throw InvalidInputError("SynthConfig: count must be >= 1");
  if (resolution < 8) throw InvalidInputError("SynthConfig: resolution must be >= 8");
  if (joint_count != 20 && joint_count != 21) {
    throw InvalidInputError("SynthConfig: joint_count must be 20 or 21");
  }
  if (hand_absent_fraction < 0.0 || hand_absent_fraction > 1.0) {
    throw InvalidInputError("SynthConfig: hand_absent_fraction must lie in [0,1]");
  }
  if (background_noise < 0.0 || background_noise >= 1.0) {
    throw InvalidInputError("SynthConfig: background_noise must lie in [0,1)");
  }
  if (absent_distractors < 0) throw InvalidInputError("SynthConfig: negative distractor count");
  if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    throw InvalidInputError("SynthConfig: bad split fractions");
  }
}

JointSet hand_template(int joint_count) {
  if (joint_count != 20 && joint_count != 21) {
    throw InvalidInputError("hand_template: joint_count must be 20 or 21");
  }
  // Wrist-centered fan; fingers radiate upward (negative y) from the wrist.
  const Keypoint wrist{0.0, 0.5};
  const double angle[5] = {-1.05, -0.42, -0.04, 0.32, 0.68};   // rad off vertical
  const double length[5] = {0.85, 1.05, 1.15, 1.05, 0.9};      // wrist to fingertip
  const double root_radius = 0.4;

  JointSet joints;
  if (joint_count == 21) joints.push_back(wrist);
  for (int f = 0; f < 5; ++f) {
    const double dx = std::sin(angle[f]);
    const double dy = -std::cos(angle[f]);
    const double step = (length[f] - root_radius) / 3.0;
    for (int k = 0; k < 4; ++k) {
      const double radius = root_radius + step * k;
      joints.push_back({wrist.x + dx * radius, wrist.y + dy * radius});
    }
  }
  return joints;
}

JointSet sample_hand_pose(const SynthConfig& cfg, Rng& rng) {
  cfg.validate();
  const double res = cfg.resolution;
  const double scale = res * rng.uniform(0.18, 0.28);
  const double phi = rng.uniform(-0.6, 0.6);
  const double cx = res * rng.uniform(0.42, 0.58);
  const double cy = res * rng.uniform(0.42, 0.58);
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);

  JointSet joints = hand_template(cfg.joint_count);
  for (Keypoint& j : joints) {
    const double rx = cos_phi * j.x - sin_phi * j.y;
    const double ry = sin_phi * j.x + cos_phi * j.y;
    j.x = cx + scale * rx + scale * rng.uniform(-0.05, 0.05);
    j.y = cy + scale * ry + scale * rng.uniform(-0.05, 0.05);
  }
  return joints;
}

namespace {

// Coarse value noise: a random lattice sampled bilinearly.
Grid value_noise(int resolution, double amplitude, Rng& rng) {
  const int step = std::max(8, resolution / 8);
  const int nodes = resolution / step + 2;
  std::vector<double> lattice(static_cast<std::size_t>(nodes) * nodes);
  for (double& v : lattice) v = rng.uniform(0.0, amplitude);

  Grid noise(resolution, resolution);
  for (int y = 0; y < resolution; ++y) {
    const double fy = static_cast<double>(y) / step;
    const int iy = static_cast<int>(fy);
    const double ty = fy - iy;
    for (int x = 0; x < resolution; ++x) {
      const double fx = static_cast<double>(x) / step;
      const int ix = static_cast<int>(fx);
      const double tx = fx - ix;
      const double top = lattice[static_cast<std::size_t>(iy) * nodes + ix] * (1.0 - tx) +
                         lattice[static_cast<std::size_t>(iy) * nodes + ix + 1] * tx;
      const double bottom = lattice[static_cast<std::size_t>(iy + 1) * nodes + ix] * (1.0 - tx) +
                            lattice[static_cast<std::size_t>(iy + 1) * nodes + ix + 1] * tx;
      noise.at(x, y) = top * (1.0 - ty) + bottom * ty;
    }
  }
  return noise;
}

}  // namespace

// Bright segment stamped with a square brush; plausibility over precision.
void draw_noise_segment(Grid& img, const Keypoint& a, const Keypoint& b, int thickness,
                        double value) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::sqrt(dx * dx + dy * dy);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  const int reach = (thickness - 1) / 2 + (thickness - 1) % 2;
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const int px = static_cast<int>(std::lround(a.x + t * dx));
    const int py = static_cast<int>(std::lround(a.y + t * dy));
    for (int oy = -reach; oy <= reach; ++oy) {
      for (int ox = -reach; ox <= reach; ++ox) {
        if (img.in_bounds(px + ox, py + oy)) {
          img.at(px + ox, py + oy) = std::max(img.at(px + ox, py + oy), value);
        }
      }
    }
  }
}

namespace {

BoundingBox foreground_bbox(const Grid& raster) {
  int x_min = raster.width();
  int y_min = raster.height();
  int x_max = -1;
  int y_max = -1;
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
  if (x_max < 0) throw InvalidInputError("render_sample: raster has no foreground");
  return {x_min, y_min, x_max, y_max};
}

}  // namespace

SynthSample render_sample(const SynthConfig& cfg, const JointSet* joints, Rng& rng) {
  cfg.validate();
  const int res = cfg.resolution;
  const RasterSpec spec = scale_raster_spec(cfg.raster, res);

  std::vector<Grid> planes;
  planes.reserve(3);
  const double base = rng.uniform(0.05, 0.2);
  for (int c = 0; c < 3; ++c) {
    Grid plane = value_noise(res, cfg.background_noise, rng);
    for (double& v : plane.values()) v = std::min(1.0, v + base);
    planes.push_back(std::move(plane));
  }

  SynthSample sample;
  if (joints) {
    const HandTopology topo = default_hand_topology(cfg.joint_count);
    const SkeletonImage raster = rasterize_skeleton(*joints, topo, res, res, spec);
    sample.bbox = foreground_bbox(raster);
    const double tint[3] = {0.95, 0.88, 0.8};
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          planes[c].at(x, y) = std::max(planes[c].at(x, y), raster.at(x, y) * tint[c]);
        }
      }
    }
    sample.joints = *joints;
    sample.hand_present = true;
  } else {
    for (int d = 0; d < cfg.absent_distractors; ++d) {
      const Keypoint a{rng.uniform(0.1, 0.9) * res, rng.uniform(0.1, 0.9) * res};
      const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double len = rng.uniform(0.15, 0.45) * res;
      const Keypoint b{a.x + std::cos(angle) * len, a.y + std::sin(angle) * len};
      const int thickness = rng.uniform_int(1, std::max(1, spec.line_thickness - 1));
      const double tint[3] = {0.9, 0.85, 0.8};
      for (int c = 0; c < 3; ++c) draw_noise_segment(planes[c], a, b, thickness, tint[c]);
    }
  }

  sample.image = from_planes(planes);
  return sample;
}

DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  Rng rng(cfg.seed);

  const int n = cfg.count;
  const int n_absent =
      std::min(n, static_cast<int>(std::lround(cfg.hand_absent_fraction * n)));
  std::vector<char> absent(static_cast<std::size_t>(n), 0);
  std::fill(absent.begin(), absent.begin() + n_absent, 1);
  rng.shuffle(absent);

  DatasetManifest manifest;
  manifest.joint_count = cfg.joint_count;
  manifest.topology = "hand" + std::to_string(cfg.joint_count);

  for (int i = 0; i < n; ++i) {
    SynthSample sample;
    if (absent[static_cast<std::size_t>(i)]) {
      sample = render_sample(cfg, nullptr, rng);
    } else {
      const JointSet pose = sample_hand_pose(cfg, rng);
      sample = render_sample(cfg, &pose, rng);
    }

    char name[32];
    std::snprintf(name, sizeof(name), "img_%05d.ppm", i);
    write_image(sample.image, (std::filesystem::path(out_dir) / name).string());

    AnnotationRecord record;
    record.image_path = name;
    record.width = cfg.resolution;
    record.height = cfg.resolution;
    record.hand_present = sample.hand_present;
    record.joints2d = sample.joints;
    record.bbox = sample.bbox;
    manifest.records.push_back(std::move(record));
  }

  // Seeded split assignment, independent of the absent/present layout.
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const int n_train = std::min(n, static_cast<int>(std::lround(cfg.train_fraction * n)));
  const int n_val = std::min(n - n_train, static_cast<int>(std::lround(cfg.val_fraction * n)));
  for (int i = 0; i < n; ++i) {
    const char* split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    manifest.records[order[static_cast<std::size_t>(i)]].split = split;
  }

  save_manifest(manifest, (std::filesystem::path(out_dir) / "manifest.txt").string());
  return manifest;
}

}  // namespace handpose
