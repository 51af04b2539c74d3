#pragma once

#include <map>
#include <optional>
#include <vector>

#include "palletmap/annotation.hpp"

namespace palletmap {

struct MatchPair {
  std::size_t prediction_index;
  std::optional<std::size_t> gt_index;  // nullopt = unmatched (FP)
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;            // one per prediction
  std::vector<std::size_t> unmatched_gts;  // FN indices
};

// Row = ground-truth class, column = predicted class; last index in each
// dimension is background.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int class_count)
      : class_count_(class_count),
        counts_(static_cast<std::size_t>(class_count + 1) * (class_count + 1),
                0) {}

  int class_count() const { return class_count_; }
  int background() const { return class_count_; }

  long long& at(int gt_class, int pred_class) {
    return counts_[static_cast<std::size_t>(gt_class) * (class_count_ + 1) +
                   pred_class];
  }
  long long at(int gt_class, int pred_class) const {
    return counts_[static_cast<std::size_t>(gt_class) * (class_count_ + 1) +
                   pred_class];
  }
  long long total() const;

 private:
  int class_count_;
  std::vector<long long> counts_;
};

struct CurveSample {
  double conf_thresh;
  double precision;
  double recall;
  double f1;
};

struct F1Curve {
  std::vector<CurveSample> samples;
  double best_conf = 0.0;
  double best_f1 = 0.0;
};

struct ImageSample {
  std::vector<Detection> preds;
  std::vector<GroundTruth> gts;
};

struct ClassReport {
  ClassId class_id;
  std::optional<double> accuracy;  // absent when the class has no GT rows
  double precision = 0.0;
  double recall = 0.0;
  double f1_at_best_conf = 0.0;
  double best_conf = 0.0;
  std::optional<double> ap50;
  std::optional<double> ap50_95;
};

struct EvalReport {
  std::vector<ClassReport> per_class;
  double map50 = 0.0;
  double map50_95 = 0.0;
  ConfusionMatrix confusion{kDefaultClassCount};
  std::vector<std::vector<CurveSample>> curves;  // per class
};

// Greedy matching: predictions in descending confidence, each takes the
// unmatched GT with highest IoU >= iou_thresh (same class when
// class_aware). Ties break by lowest GT index.
MatchResult match(const std::vector<Detection>& preds,
                  const std::vector<GroundTruth>& gts, double iou_thresh,
                  bool class_aware);

ConfusionMatrix confusion(const std::vector<ImageSample>& images,
                          double iou_thresh, double conf_thresh,
                          int class_count = kDefaultClassCount);

// Row-normalized diagonal; empty row -> absent.
std::optional<double> class_accuracy(const ConfusionMatrix& cm, ClassId c);

double f1_score(double precision, double recall);

F1Curve pr_f1_curve(const std::vector<ImageSample>& images, double iou_thresh,
                    ClassId cls, const std::vector<double>& conf_grid);

std::vector<double> default_conf_grid();  // 0.00 .. 1.00 step 0.01

// 101-point interpolated AP. Returns nullopt when the class has no GT.
std::optional<double> average_precision(const std::vector<ImageSample>& images,
                                        double iou_thresh, ClassId cls);

// Mean over thresholds of mean over classes (classes without GT excluded).
double map_range(const std::vector<ImageSample>& images,
                 const std::vector<double>& iou_thresholds,
                 int class_count = kDefaultClassCount);

std::vector<double> coco_iou_thresholds();  // 0.50 .. 0.95 step 0.05

EvalReport evaluate(const std::vector<ImageSample>& images, double iou_thresh,
                    double conf_thresh, int class_count = kDefaultClassCount);

}  // namespace palletmap
