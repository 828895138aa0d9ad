#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "handpose/detector.hpp"
#include "handpose/heatmap.hpp"
#include "handpose/manifest.hpp"
#include "handpose/metrics.hpp"
#include "handpose/net.hpp"
#include "handpose/skeleton.hpp"
#include "handpose/train.hpp"

namespace handpose {

// Stand-in for a trained segmenter: the ground-truth raster for the record,
// optionally corrupted with bright speckle and clutter segments.
struct OracleSkeletonOptions {
  RasterSpec raster{};            // quoted at reference resolution 128
  double salt_probability = 0.0;  // per-pixel chance of a bright speck
  int distractor_segments = 0;    // clutter segments per image
  std::uint64_t seed = 0;
};

SkeletonImage oracle_skeleton(const AnnotationRecord& record, int joint_count,
                              const OracleSkeletonOptions& options, std::size_t record_index);

struct DetectReport {
  std::vector<DetectionDecision> decisions;  // one per record, in order
  double mean_iou = 0.0;                     // over records with ground-truth boxes
  ConfusionCounts confusion;
  ClassificationMetrics classification;
  std::vector<int> sweep_counts;  // presence_count sweep, one row per value
  std::vector<double> sweep_auc;
  std::vector<double> sweep_tpr;
  std::vector<double> sweep_fpr;
};

// Detector evaluation over oracle skeletons. Each swept presence_count is
// scored by the AUC of its binary hand/no-hand decision, which needs both
// classes in the manifest. presence_sweep may be empty.
DetectReport run_detect(const DatasetManifest& manifest, const DetectorThresholds& thresholds,
                        const OracleSkeletonOptions& oracle,
                        const std::vector<int>& presence_sweep);

// Ablation variants: full model, no skeleton conditioning, and additionally
// no multi-scale supervision (only the full-resolution head).
enum class PoseVariant { kMultiSkeleton, kMulti, kSingleScale };

PoseVariant parse_variant(const std::string& name);
std::string variant_name(PoseVariant variant);
std::vector<int> variant_heads(PoseVariant variant);
NetworkConfig variant_config(PoseVariant variant, int joint_count, int input_resolution,
                             int base_channels);

// Ground-truth-box crop of one record, with joints mapped into the crop.
struct RecordCrop {
  std::vector<Grid> planes;  // RGB at crop resolution
  JointSet joints;
  CropTransform transform;
  BoundingBox crop_frame_box;  // ground-truth box mapped into the crop
};

RecordCrop crop_record(const AnnotationRecord& record, const std::string& base_dir, int out_size,
                       double margin);

struct PoseTrainOptions {
  PoseVariant variant = PoseVariant::kMultiSkeleton;
  int input_resolution = 64;
  int base_channels = 8;
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 0;
  AdamConfig adam{};
  double crop_margin = 0.25;
  RasterSpec raster{};  // conditioning skeleton geometry, reference 128
  GaussianSpec gaussian{};
  // Nonzero values overwrite every head bias before training so the sigmoid
  // heads start near the background rate (e.g. -4.6 starts them at ~0.01).
  // Targets are mostly background; from a zero init Adam first drives all
  // logits steeply negative, which can saturate the sigmoids and stall
  // training. 0 keeps the stock initialization.
  double head_bias_init = 0.0;
  std::string split = "train";
};

// Builds crops, conditioning skeletons and Gaussian targets from the
// manifest, then trains a fresh network for the variant.
TrainResult train_pose_model(const DatasetManifest& manifest, const std::string& base_dir,
                             const PoseTrainOptions& options);

struct PoseEvalOptions {
  PoseVariant variant = PoseVariant::kMultiSkeleton;
  double crop_margin = 0.25;
  RasterSpec raster{};
  std::vector<double> pck_thresholds;  // empty selects 0.02 .. 0.50
  std::string split = "test";
};

struct PoseEvalReport {
  double mjpe = 0.0;  // mean over all evaluated joints, crop frame
  PckCurve pck;
  std::size_t evaluated = 0;  // records scored
};

PoseEvalReport run_pose_eval(const DatasetManifest& manifest, const std::string& base_dir,
                             const NetworkParams& params, const PoseEvalOptions& options);

// Reports: CSV with a header row; the PCK curve is also emitted as a
// standalone SVG polyline.
void write_pck_csv(const PckCurve& curve, const std::string& path);
void write_pck_svg(const PckCurve& curve, const std::string& path);
void write_detect_csv(const DetectReport& report, const DatasetManifest& manifest,
                      const std::string& path);
void write_sweep_csv(const DetectReport& report, const std::string& path);

}  // namespace handpose
