#include "handpose/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "handpose/error.hpp"

namespace handpose {

namespace {

// One normalized distance per joint, appended to out.
void normalized_distances(const JointSet& pred, const JointSet& gt, const BoundingBox& bbox,
                          std::vector<double>& out) {
  if (pred.size() != gt.size()) throw ShapeError("pck: joint count mismatch");
  if (pred.empty()) throw InvalidInputError("pck: empty joint set");
  if (!bbox.valid()) throw InvalidInputError("pck: invalid bounding box");
  const double size = static_cast<double>(std::max(bbox.width(), bbox.height()));
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double dx = pred[k].x - gt[k].x;
    const double dy = pred[k].y - gt[k].y;
    out.push_back(std::sqrt(dx * dx + dy * dy) / size);
  }
}

PckCurve curve_from_distances(const std::vector<double>& normalized,
                              const std::vector<double>& thresholds) {
  PckCurve curve;
  curve.thresholds = thresholds;
  curve.fractions.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t correct = 0;
    for (double d : normalized) {
      if (d <= t) ++correct;
    }
    curve.fractions.push_back(normalized.empty()
                                  ? 0.0
                                  : static_cast<double>(correct) / normalized.size());
  }
  return curve;
}

}  // namespace

PckCurve pck(const JointSet& pred, const JointSet& gt, const BoundingBox& bbox,
             const std::vector<double>& thresholds) {
  std::vector<double> normalized;
  normalized_distances(pred, gt, bbox, normalized);
  return curve_from_distances(normalized, thresholds);
}

void PckAccumulator::add(const JointSet& pred, const JointSet& gt, const BoundingBox& bbox) {
  normalized_distances(pred, gt, bbox, normalized_);
}

PckCurve PckAccumulator::curve(const std::vector<double>& thresholds) const {
  return curve_from_distances(normalized_, thresholds);
}

double mjpe(const JointSet& pred, const JointSet& gt) {
  if (pred.size() != gt.size()) throw ShapeError("mjpe: joint count mismatch");
  if (pred.empty()) throw InvalidInputError("mjpe: empty joint set");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double dx = pred[k].x - gt[k].x;
    const double dy = pred[k].y - gt[k].y;
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(pred.size());
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || !b.valid()) throw InvalidInputError("iou: invalid bounding box");
  const int ix_min = std::max(a.x_min, b.x_min);
  const int iy_min = std::max(a.y_min, b.y_min);
  const int ix_max = std::min(a.x_max, b.x_max);
  const int iy_max = std::min(a.y_max, b.y_max);
  if (ix_min > ix_max || iy_min > iy_max) return 0.0;
  const std::int64_t inter = static_cast<std::int64_t>(ix_max - ix_min + 1) * (iy_max - iy_min + 1);
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
    throw InvalidInputError("classification_metrics: negative count");
  }
  const std::int64_t total = c.tp + c.fp + c.tn + c.fn;
  if (total == 0) throw InvalidInputError("classification_metrics: no samples");
  auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  ClassificationMetrics m;
  m.accuracy = ratio(c.tp + c.tn, total);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double roc_auc(const std::vector<double>& scores_positive,
               const std::vector<double>& scores_negative) {
  if (scores_positive.empty() || scores_negative.empty()) {
    throw InvalidInputError("roc_auc: both classes need at least one score");
  }

  // Sweep thresholds from high to low; each distinct score moves the
  // operating point and the trapezoid rule integrates TPR over FPR.
  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> entries;
  entries.reserve(scores_positive.size() + scores_negative.size());
  for (double s : scores_positive) entries.push_back({s, true});
  for (double s : scores_negative) entries.push_back({s, false});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  const double total_pos = static_cast<double>(scores_positive.size());
  const double total_neg = static_cast<double>(scores_negative.size());
  double auc = 0.0;
  double tpr_prev = 0.0;
  double fpr_prev = 0.0;
  std::size_t cum_pos = 0;
  std::size_t cum_neg = 0;
  std::size_t i = 0;
  while (i < entries.size()) {
    const double score = entries[i].score;
    while (i < entries.size() && entries[i].score == score) {
      if (entries[i].positive) {
        ++cum_pos;
      } else {
        ++cum_neg;
      }
      ++i;
    }
    const double tpr = static_cast<double>(cum_pos) / total_pos;
    const double fpr = static_cast<double>(cum_neg) / total_neg;
    auc += (fpr - fpr_prev) * (tpr + tpr_prev) * 0.5;
    tpr_prev = tpr;
    fpr_prev = fpr;
  }
  return auc;
}

}  // namespace handpose
