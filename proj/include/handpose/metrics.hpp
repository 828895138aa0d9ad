#pragma once

#include <cstdint>
#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

struct PckCurve {
  std::vector<double> thresholds;
  std::vector<double> fractions;  // matched by position, each in [0,1]
};

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Fraction of joints whose distance to ground truth, normalized by the
// larger bounding-box side, falls within each threshold.
PckCurve pck(const JointSet& pred, const JointSet& gt, const BoundingBox& bbox,
             const std::vector<double>& thresholds);

// Pools normalized joint distances across samples so a dataset-level curve
// averages per-joint correctness over everything added.
class PckAccumulator {
 public:
  void add(const JointSet& pred, const JointSet& gt, const BoundingBox& bbox);
  PckCurve curve(const std::vector<double>& thresholds) const;
  std::size_t joint_count() const { return normalized_.size(); }

 private:
  std::vector<double> normalized_;
};

// Mean euclidean pixel distance over joints.
double mjpe(const JointSet& pred, const JointSet& gt);

// Intersection over union with inclusive-pixel box areas.
double iou(const BoundingBox& a, const BoundingBox& b);

// Standard confusion-matrix metrics; 0/0 ratios are 0 by convention.
ClassificationMetrics classification_metrics(const ConfusionCounts& c);

// Area under the ROC curve by trapezoidal integration over all distinct
// score thresholds; ties contribute half, so the result equals the
// Mann-Whitney statistic P(pos > neg) + P(pos = neg)/2.
double roc_auc(const std::vector<double>& scores_positive,
               const std::vector<double>& scores_negative);

}  // namespace handpose
