#include "palletmap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "palletmap/error.hpp"

namespace palletmap {

namespace {

// (confidence, tp flag) points gathered across images, with a stable key
// so global ordering never depends on traversal or thread schedule.
struct ScoredPoint {
  double confidence;
  bool tp;
  std::size_t image_index;
  std::size_t pred_index;
};

bool scored_before(const ScoredPoint& a, const ScoredPoint& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.image_index != b.image_index) return a.image_index < b.image_index;
  return a.pred_index < b.pred_index;
}

std::vector<ScoredPoint> gather_class_points(
    const std::vector<ImageSample>& images, double iou_thresh, ClassId cls,
    std::size_t* gt_count_out) {
  std::vector<std::vector<ScoredPoint>> per_image(images.size());
  std::vector<std::size_t> gt_counts(images.size(), 0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::vector<Detection> preds;
    std::vector<std::size_t> pred_ids;
    for (std::size_t k = 0; k < images[i].preds.size(); ++k) {
      if (images[i].preds[k].class_id == cls) {
        preds.push_back(images[i].preds[k]);
        pred_ids.push_back(k);
      }
    }
    std::vector<GroundTruth> gts;
    for (const auto& g : images[i].gts) {
      if (g.class_id == cls) gts.push_back(g);
    }
    gt_counts[i] = gts.size();
    const MatchResult mr = match(preds, gts, iou_thresh, true);
    for (const auto& pr : mr.pairs) {
      per_image[i].push_back({preds[pr.prediction_index].confidence,
                              pr.gt_index.has_value(), i,
                              pred_ids[pr.prediction_index]});
    }
  }
  std::vector<ScoredPoint> points;
  for (auto& v : per_image) {
    points.insert(points.end(), v.begin(), v.end());
  }
  std::sort(points.begin(), points.end(), scored_before);
  *gt_count_out = std::accumulate(gt_counts.begin(), gt_counts.end(),
                                  std::size_t{0});
  return points;
}

}  // namespace

long long ConfusionMatrix::total() const {
  long long t = 0;
  for (int r = 0; r <= class_count_; ++r) {
    for (int c = 0; c <= class_count_; ++c) t += at(r, c);
  }
  return t;
}

MatchResult match(const std::vector<Detection>& preds,
                  const std::vector<GroundTruth>& gts, double iou_thresh,
                  bool class_aware) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  MatchResult result;
  result.pairs.resize(preds.size());
  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t pi : order) {
    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi]) continue;
      if (class_aware && gts[gi].class_id != preds[pi].class_id) continue;
      const double ov = iou(preds[pi].box, gts[gi].box);
      if (ov >= iou_thresh && ov > best_iou) {
        best_iou = ov;
        best = gi;
      }
    }
    if (best) gt_taken[*best] = true;
    result.pairs[pi] = {pi, best, best ? best_iou : 0.0};
  }
  for (std::size_t gi = 0; gi < gts.size(); ++gi) {
    if (!gt_taken[gi]) result.unmatched_gts.push_back(gi);
  }
  return result;
}

ConfusionMatrix confusion(const std::vector<ImageSample>& images,
                          double iou_thresh, double conf_thresh,
                          int class_count) {
  ConfusionMatrix cm(class_count);
  for (const auto& img : images) {
    std::vector<Detection> preds;
    for (const auto& d : img.preds) {
      if (d.confidence >= conf_thresh) preds.push_back(d);
    }
    const MatchResult mr = match(preds, img.gts, iou_thresh, false);
    for (const auto& pr : mr.pairs) {
      if (pr.gt_index) {
        cm.at(img.gts[*pr.gt_index].class_id,
              preds[pr.prediction_index].class_id) += 1;
      } else {
        cm.at(cm.background(), preds[pr.prediction_index].class_id) += 1;
      }
    }
    for (std::size_t gi : mr.unmatched_gts) {
      cm.at(img.gts[gi].class_id, cm.background()) += 1;
    }
  }
  return cm;
}

std::optional<double> class_accuracy(const ConfusionMatrix& cm, ClassId c) {
  long long row = 0;
  for (int j = 0; j <= cm.class_count(); ++j) row += cm.at(c, j);
  if (row == 0) return std::nullopt;
  return static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

std::vector<double> default_conf_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

F1Curve pr_f1_curve(const std::vector<ImageSample>& images, double iou_thresh,
                    ClassId cls, const std::vector<double>& conf_grid) {
  std::size_t gt_count = 0;
  const auto points = gather_class_points(images, iou_thresh, cls, &gt_count);

  F1Curve curve;
  for (double t : conf_grid) {
    std::size_t tp = 0, fp = 0;
    for (const auto& p : points) {
      if (p.confidence < t) continue;
      (p.tp ? tp : fp) += 1;
    }
    const std::size_t retained = tp + fp;
    const double precision =
        retained > 0 ? static_cast<double>(tp) / retained : 0.0;
    const double recall =
        gt_count > 0 ? static_cast<double>(tp) / gt_count : 0.0;
    curve.samples.push_back({t, precision, recall, f1_score(precision, recall)});
  }
  for (const auto& s : curve.samples) {
    if (s.f1 > curve.best_f1) {
      curve.best_f1 = s.f1;
      curve.best_conf = s.conf_thresh;
    }
  }
  return curve;
}

std::optional<double> average_precision(const std::vector<ImageSample>& images,
                                        double iou_thresh, ClassId cls) {
  std::size_t gt_count = 0;
  const auto points = gather_class_points(images, iou_thresh, cls, &gt_count);
  if (gt_count == 0) return std::nullopt;
  if (points.empty()) return 0.0;

  std::vector<double> precisions(points.size()), recalls(points.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].tp) ++tp;
    precisions[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recalls[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }

  // 101-point interpolation with a (recall 0, precision 1) anchor.
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double env = r == 0.0 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (recalls[i] >= r) env = std::max(env, precisions[i]);
    }
    sum += env;
  }
  return sum / 101.0;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
  return t;
}

double map_range(const std::vector<ImageSample>& images,
                 const std::vector<double>& iou_thresholds, int class_count) {
  if (iou_thresholds.empty()) throw ConfigError("threshold list is empty");
  double sum = 0.0;
  for (double t : iou_thresholds) {
    double class_sum = 0.0;
    int present = 0;
    for (ClassId c = 0; c < class_count; ++c) {
      if (auto ap = average_precision(images, t, c)) {
        class_sum += *ap;
        ++present;
      }
    }
    sum += present > 0 ? class_sum / present : 0.0;
  }
  return sum / static_cast<double>(iou_thresholds.size());
}

EvalReport evaluate(const std::vector<ImageSample>& images, double iou_thresh,
                    double conf_thresh, int class_count) {
  EvalReport report;
  report.confusion = confusion(images, iou_thresh, conf_thresh, class_count);

  const auto grid = default_conf_grid();
  const auto coco = coco_iou_thresholds();
  double map50_sum = 0.0, map5095_sum = 0.0;
  int present50 = 0, present5095 = 0;
  for (ClassId c = 0; c < class_count; ++c) {
    ClassReport cr;
    cr.class_id = c;
    cr.accuracy = class_accuracy(report.confusion, c);
    const F1Curve curve = pr_f1_curve(images, iou_thresh, c, grid);
    report.curves.push_back(curve.samples);
    cr.f1_at_best_conf = curve.best_f1;
    cr.best_conf = curve.best_conf;
    for (const auto& s : curve.samples) {
      if (s.conf_thresh == curve.best_conf) {
        cr.precision = s.precision;
        cr.recall = s.recall;
        break;
      }
    }
    cr.ap50 = average_precision(images, 0.50, c);
    if (cr.ap50) {
      map50_sum += *cr.ap50;
      ++present50;
    }
    double ap_sum = 0.0;
    bool has = true;
    for (double t : coco) {
      if (auto ap = average_precision(images, t, c)) {
        ap_sum += *ap;
      } else {
        has = false;
        break;
      }
    }
    if (has && !coco.empty()) {
      cr.ap50_95 = ap_sum / static_cast<double>(coco.size());
      map5095_sum += *cr.ap50_95;
      ++present5095;
    }
    report.per_class.push_back(cr);
  }
  report.map50 = present50 > 0 ? map50_sum / present50 : 0.0;
  report.map50_95 = present5095 > 0 ? map5095_sum / present5095 : 0.0;
  return report;
}

}  // namespace palletmap
