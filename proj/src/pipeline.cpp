#include "handpose/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "handpose/error.hpp"
#include "handpose/image_io.hpp"
#include "handpose/rng.hpp"
#include "handpose/synth.hpp"
#include "handpose/textfmt.hpp"

namespace handpose {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Decorrelates per-record corruption streams from one base seed.
std::uint64_t record_seed(std::uint64_t base, std::size_t index) {
  return base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
}

void corrupt_skeleton(SkeletonImage& img, const OracleSkeletonOptions& options, Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  const int res = std::max(w, h);
  const RasterSpec spec = scale_raster_spec(options.raster, res);
  for (int i = 0; i < options.distractor_segments; ++i) {
    const Keypoint a{rng.uniform(0.05, 0.95) * (w - 1), rng.uniform(0.05, 0.95) * (h - 1)};
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double length = rng.uniform(0.10, 0.35) * res;
    const Keypoint b{a.x + std::cos(angle) * length, a.y + std::sin(angle) * length};
    const int thickness = rng.uniform_int(1, std::max(1, spec.line_thickness));
    draw_noise_segment(img, a, b, thickness, 1.0);
  }
  if (options.salt_probability > 0.0) {
    for (double& v : img.values()) {
      if (rng.uniform() < options.salt_probability) v = std::max(v, rng.uniform(0.6, 1.0));
    }
  }
}

std::ofstream open_report(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  return out;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

SkeletonImage oracle_skeleton(const AnnotationRecord& record, int joint_count,
                              const OracleSkeletonOptions& options, std::size_t record_index) {
  SkeletonImage img(record.width, record.height, 0.0);
  if (record.hand_present) {
    if (static_cast<int>(record.joints2d.size()) != joint_count)
      throw EvalError("record '" + record.image_path + "' lacks the 2D joints needed to build its skeleton");
    const int res = std::max(record.width, record.height);
    img = rasterize_skeleton(record.joints2d, default_hand_topology(joint_count), record.width,
                             record.height, scale_raster_spec(options.raster, res));
  }
  Rng rng(record_seed(options.seed, record_index));
  corrupt_skeleton(img, options, rng);
  return img;
}

DetectReport run_detect(const DatasetManifest& manifest, const DetectorThresholds& thresholds,
                        const OracleSkeletonOptions& oracle,
                        const std::vector<int>& presence_sweep) {
  if (manifest.records.empty()) throw EvalError("cannot run detection on an empty manifest");

  DetectReport report;
  report.decisions.reserve(manifest.records.size());
  double iou_sum = 0.0;
  std::size_t iou_count = 0;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const AnnotationRecord& record = manifest.records[i];
    if (record.hand_present && !record.bbox)
      throw EvalError("record '" + record.image_path + "' is hand-present but has no ground-truth box");
    const SkeletonImage skeleton = oracle_skeleton(record, manifest.joint_count, oracle, i);
    DetectionDecision decision = decide_hand_presence(skeleton, thresholds);

    if (record.hand_present) {
      decision.hand_present ? ++report.confusion.tp : ++report.confusion.fn;
    } else {
      decision.hand_present ? ++report.confusion.fp : ++report.confusion.tn;
    }
    if (record.bbox) {
      iou_sum += decision.bbox ? iou(*decision.bbox, *record.bbox) : 0.0;
      ++iou_count;
    }
    report.decisions.push_back(std::move(decision));
  }
  if (iou_count == 0) throw EvalError("manifest has no ground-truth boxes to score against");
  report.mean_iou = iou_sum / static_cast<double>(iou_count);
  report.classification = classification_metrics(report.confusion);

  if (!presence_sweep.empty()) {
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
      (manifest.records[i].hand_present ? positives : negatives).push_back(i);
    if (positives.empty() || negatives.empty())
      throw EvalError("the presence-count sweep needs both hand-present and hand-absent records");
    for (int count : presence_sweep) {
      std::vector<double> pos_scores, neg_scores;
      pos_scores.reserve(positives.size());
      neg_scores.reserve(negatives.size());
      std::int64_t hits = 0, alarms = 0;
      for (std::size_t i : positives) {
        const bool fired = report.decisions[i].foreground_pixels >= count;
        hits += fired;
        pos_scores.push_back(fired ? 1.0 : 0.0);
      }
      for (std::size_t i : negatives) {
        const bool fired = report.decisions[i].foreground_pixels >= count;
        alarms += fired;
        neg_scores.push_back(fired ? 1.0 : 0.0);
      }
      report.sweep_counts.push_back(count);
      report.sweep_auc.push_back(roc_auc(pos_scores, neg_scores));
      report.sweep_tpr.push_back(static_cast<double>(hits) / static_cast<double>(positives.size()));
      report.sweep_fpr.push_back(static_cast<double>(alarms) /
                                 static_cast<double>(negatives.size()));
    }
  }
  return report;
}

PoseVariant parse_variant(const std::string& name) {
  if (name == "multi-skeleton" || name == "multi+skeleton") return PoseVariant::kMultiSkeleton;
  if (name == "multi") return PoseVariant::kMulti;
  if (name == "single-scale") return PoseVariant::kSingleScale;
  throw ConfigError("unknown variant '" + name +
                    "'; expected multi-skeleton, multi or single-scale");
}

std::string variant_name(PoseVariant variant) {
  switch (variant) {
    case PoseVariant::kMultiSkeleton:
      return "multi-skeleton";
    case PoseVariant::kMulti:
      return "multi";
    case PoseVariant::kSingleScale:
      return "single-scale";
  }
  throw ConfigError("unhandled variant value");
}

std::vector<int> variant_heads(PoseVariant variant) {
  if (variant == PoseVariant::kSingleScale) return {kHeadCount - 1};
  std::vector<int> heads(kHeadCount);
  for (int i = 0; i < kHeadCount; ++i) heads[i] = i;
  return heads;
}

NetworkConfig variant_config(PoseVariant variant, int joint_count, int input_resolution,
                             int base_channels) {
  NetworkConfig cfg;
  cfg.image_channels = 3;
  cfg.use_skeleton = variant == PoseVariant::kMultiSkeleton;
  cfg.base_channels = base_channels;
  cfg.joint_count = joint_count;
  cfg.input_resolution = input_resolution;
  return cfg;
}

RecordCrop crop_record(const AnnotationRecord& record, const std::string& base_dir, int out_size,
                       double margin) {
  if (!record.bbox)
    throw EvalError("record '" + record.image_path + "' has no ground-truth box to crop");
  const std::string path = (std::filesystem::path(base_dir) / record.image_path).string();
  std::vector<Grid> planes = to_planes(read_image(path));
  if (planes.size() == 1) planes = {planes[0], planes[0], planes[0]};  // grayscale -> RGB

  CropResult cropped = crop_and_resize(planes, *record.bbox, out_size, margin);

  RecordCrop out;
  out.planes = std::move(cropped.channels);
  out.transform = cropped.transform;
  out.joints.reserve(record.joints2d.size());
  for (const Keypoint& joint : record.joints2d) out.joints.push_back(out.transform.apply(joint));

  const Keypoint tl = out.transform.apply(
      {static_cast<double>(record.bbox->x_min), static_cast<double>(record.bbox->y_min)});
  const Keypoint br = out.transform.apply(
      {static_cast<double>(record.bbox->x_max), static_cast<double>(record.bbox->y_max)});
  const auto to_px = [out_size](double v) {
    return std::clamp(static_cast<int>(std::llround(v)), 0, out_size - 1);
  };
  out.crop_frame_box = {to_px(tl.x), to_px(tl.y), to_px(br.x), to_px(br.y)};
  return out;
}

namespace {

// Shared by training and evaluation: crop, conditioning skeleton, network input.
struct PreparedRecord {
  RecordCrop crop;
  SkeletonImage skeleton;  // empty unless the config conditions on one
};

PreparedRecord prepare_record(const AnnotationRecord& record, const std::string& base_dir,
                              const NetworkConfig& cfg, double margin, const RasterSpec& raster) {
  PreparedRecord prep;
  prep.crop = crop_record(record, base_dir, cfg.input_resolution, margin);
  if (cfg.use_skeleton) {
    prep.skeleton = rasterize_skeleton(prep.crop.joints, default_hand_topology(cfg.joint_count),
                                       cfg.input_resolution, cfg.input_resolution,
                                       scale_raster_spec(raster, cfg.input_resolution));
  }
  return prep;
}

std::vector<std::size_t> usable_records(const DatasetManifest& manifest, const std::string& split) {
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const AnnotationRecord& r = manifest.records[i];
    if (r.split != split || !r.hand_present) continue;
    if (static_cast<int>(r.joints2d.size()) != manifest.joint_count)
      throw EvalError("record '" + r.image_path + "' is hand-present without full 2D joints");
    if (!r.bbox) throw EvalError("record '" + r.image_path + "' is hand-present without a box");
    selected.push_back(i);
  }
  return selected;
}

}  // namespace

TrainResult train_pose_model(const DatasetManifest& manifest, const std::string& base_dir,
                             const PoseTrainOptions& options) {
  const std::vector<std::size_t> selected = usable_records(manifest, options.split);
  if (selected.empty())
    throw EvalError("no hand-present records in split '" + options.split + "' to train on");

  const NetworkConfig cfg = variant_config(options.variant, manifest.joint_count,
                                           options.input_resolution, options.base_channels);
  std::vector<TrainingSample> samples;
  samples.reserve(selected.size());
  for (std::size_t i : selected) {
    const PreparedRecord prep = prepare_record(manifest.records[i], base_dir, cfg,
                                               options.crop_margin, options.raster);
    TrainingSample sample;
    sample.input = make_network_input(prep.crop.planes,
                                      cfg.use_skeleton ? &prep.skeleton : nullptr, cfg);
    sample.targets = make_head_targets(prep.crop.joints, cfg, options.gaussian);
    samples.push_back(std::move(sample));
  }

  TrainConfig tc;
  tc.epochs = options.epochs;
  tc.batch_size = options.batch_size;
  tc.seed = options.seed;
  tc.adam = options.adam;
  tc.supervised_heads = variant_heads(options.variant);
  NetworkParams params = build_network(cfg, options.seed);
  if (options.head_bias_init != 0.0) {
    for (Conv2D& head : params.heads) {
      std::fill(head.bias.begin(), head.bias.end(), options.head_bias_init);
    }
  }
  return train(std::move(params), samples, tc);
}

PoseEvalReport run_pose_eval(const DatasetManifest& manifest, const std::string& base_dir,
                             const NetworkParams& params, const PoseEvalOptions& options) {
  const NetworkConfig& cfg = params.config;
  if (cfg.joint_count != manifest.joint_count)
    throw ConfigError("checkpoint joint count does not match the manifest");
  if (cfg.use_skeleton != (options.variant == PoseVariant::kMultiSkeleton))
    throw ConfigError(std::string("checkpoint was trained ") +
                      (cfg.use_skeleton ? "with" : "without") +
                      " skeleton conditioning, which does not match variant '" +
                      variant_name(options.variant) + "'");

  const std::vector<std::size_t> selected = usable_records(manifest, options.split);
  if (selected.empty())
    throw EvalError("no hand-present records in split '" + options.split + "' to evaluate");

  std::vector<double> thresholds = options.pck_thresholds;
  if (thresholds.empty()) {
    for (int i = 1; i <= 25; ++i) thresholds.push_back(0.02 * i);
  }

  const std::vector<int> heads = variant_heads(options.variant);
  PckAccumulator pck_acc;
  double dist_sum = 0.0;
  std::size_t dist_count = 0;
  PoseEvalReport report;
  for (std::size_t i : selected) {
    const PreparedRecord prep = prepare_record(manifest.records[i], base_dir, cfg,
                                               options.crop_margin, options.raster);
    const JointSet pred = predict_joints(params, prep.crop.planes,
                                         cfg.use_skeleton ? &prep.skeleton : nullptr, heads);
    for (std::size_t k = 0; k < pred.size(); ++k)
      dist_sum += std::hypot(pred[k].x - prep.crop.joints[k].x, pred[k].y - prep.crop.joints[k].y);
    dist_count += pred.size();
    pck_acc.add(pred, prep.crop.joints, prep.crop.crop_frame_box);
    ++report.evaluated;
  }
  report.mjpe = dist_sum / static_cast<double>(dist_count);
  report.pck = pck_acc.curve(thresholds);
  return report;
}

void write_pck_csv(const PckCurve& curve, const std::string& path) {
  std::ofstream out = open_report(path);
  out << "threshold,fraction\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
    out << format_double(curve.thresholds[i]) << ',' << format_double(curve.fractions[i]) << '\n';
  if (!out) throw FormatError("failed writing '" + path + "'");
}

void write_pck_svg(const PckCurve& curve, const std::string& path) {
  constexpr int kWidth = 480, kHeight = 360;
  constexpr double kLeft = 50, kRight = 465, kTop = 15, kBottom = 320;
  double max_threshold = 0.0;
  for (double t : curve.thresholds) max_threshold = std::max(max_threshold, t);
  if (max_threshold <= 0.0) max_threshold = 1.0;

  const auto map_x = [&](double t) { return kLeft + (kRight - kLeft) * t / max_threshold; };
  const auto map_y = [&](double f) { return kBottom - (kBottom - kTop) * f; };

  std::ofstream out = open_report(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "  <line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << "normalized distance threshold</text>\n";
  out << "  <text x=\"15\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\""
      << " transform=\"rotate(-90 15 " << (kTop + kBottom) / 2 << ")\">PCK</text>\n";
  out << "  <text x=\"" << kLeft - 6 << "\" y=\"" << kBottom + 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">0</text>\n";
  out << "  <text x=\"" << kRight << "\" y=\"" << kBottom + 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << format_double(max_threshold) << "</text>\n";
  out << "  <text x=\"" << kLeft - 8 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1</text>\n";
  if (!curve.thresholds.empty()) {
    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
      if (i) out << ' ';
      out << format_double(map_x(curve.thresholds[i])) << ','
          << format_double(map_y(curve.fractions[i]));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw FormatError("failed writing '" + path + "'");
}

void write_detect_csv(const DetectReport& report, const DatasetManifest& manifest,
                      const std::string& path) {
  if (report.decisions.size() != manifest.records.size())
    throw ShapeError("detection report does not cover the manifest");
  std::ofstream out = open_report(path);
  out << "index,image,hand_present,predicted,foreground_pixels,iou,x_min,y_min,x_max,y_max\n";
  for (std::size_t i = 0; i < report.decisions.size(); ++i) {
    const AnnotationRecord& record = manifest.records[i];
    const DetectionDecision& d = report.decisions[i];
    out << i << ',' << csv_field(record.image_path) << ',' << (record.hand_present ? 1 : 0) << ','
        << (d.hand_present ? 1 : 0) << ',' << d.foreground_pixels << ',';
    if (record.bbox) out << format_double(d.bbox ? iou(*d.bbox, *record.bbox) : 0.0);
    if (d.bbox) {
      out << ',' << d.bbox->x_min << ',' << d.bbox->y_min << ',' << d.bbox->x_max << ','
          << d.bbox->y_max;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  if (!out) throw FormatError("failed writing '" + path + "'");
}

void write_sweep_csv(const DetectReport& report, const std::string& path) {
  std::ofstream out = open_report(path);
  out << "presence_count,auc,tpr,fpr\n";
  for (std::size_t i = 0; i < report.sweep_counts.size(); ++i) {
    out << report.sweep_counts[i] << ',' << format_double(report.sweep_auc[i]) << ','
        << format_double(report.sweep_tpr[i]) << ',' << format_double(report.sweep_fpr[i]) << '\n';
  }
  if (!out) throw FormatError("failed writing '" + path + "'");
}

}  // namespace handpose
