#include "palletmap/losses.hpp"

#include <cmath>
#include <numeric>

#include "palletmap/error.hpp"

namespace palletmap {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double clamp_prob(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

}  // namespace

void DflBins::validate() const {
  if (reg_max <= 0) throw ValidationError("reg_max must be positive");
  if (probs.size() != static_cast<std::size_t>(reg_max) + 1) {
    throw ValidationError("DFL bins need reg_max + 1 probabilities");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (p <= 0.0 || p > 1.0) {
      throw ValidationError("DFL bin probability outside (0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("DFL bin probabilities must sum to 1");
  }
}

CiouTerms ciou_loss(const BoundingBox& pred, const BoundingBox& gt) {
  CiouTerms t;
  t.iou = iou(pred, gt);
  t.center_dist_sq = center_distance_sq(pred, gt);
  t.enclosing_diag_sq = enclosing_diagonal_sq(pred, gt);
  const double d = std::atan(gt.width() / gt.height()) -
                   std::atan(pred.width() / pred.height());
  t.aspect_term = (4.0 / (kPi * kPi)) * d * d;
  const double denom = (1.0 - t.iou) + t.aspect_term;
  t.alpha = denom > 0.0 ? t.aspect_term / denom : 0.0;
  t.loss = 1.0 - t.iou + t.center_dist_sq / t.enclosing_diag_sq +
           t.alpha * t.aspect_term;
  return t;
}

std::array<double, 4> ciou_grad(const BoundingBox& pred, const BoundingBox& gt) {
  const double px1 = pred.x1(), py1 = pred.y1(), px2 = pred.x2(),
               py2 = pred.y2();
  const double gx1 = gt.x1(), gy1 = gt.y1(), gx2 = gt.x2(), gy2 = gt.y2();
  const double wp = pred.width(), hp = pred.height();

  // IoU term.
  const double iw = std::min(px2, gx2) - std::max(px1, gx1);
  const double ih = std::min(py2, gy2) - std::max(py1, gy1);
  const bool overlap = iw > 0.0 && ih > 0.0;
  const double inter = overlap ? iw * ih : 0.0;
  const double uni = pred.area() + gt.area() - inter;
  const double iou_val = inter / uni;

  // Branch weight at min/max kinks: 1 when the pred coordinate is the
  // active bound, 0.5 at an exact tie (the symmetric subgradient, which
  // central differences recover), 0 otherwise.
  const auto kink = [](double pred_c, double gt_c, bool pred_active_if_greater) {
    if (pred_c == gt_c) return 0.5;
    return (pred_c > gt_c) == pred_active_if_greater ? 1.0 : 0.0;
  };
  std::array<double, 4> d_inter{0, 0, 0, 0};
  if (overlap) {
    d_inter[0] = -ih * kink(px1, gx1, true);
    d_inter[1] = -iw * kink(py1, gy1, true);
    d_inter[2] = ih * kink(px2, gx2, false);
    d_inter[3] = iw * kink(py2, gy2, false);
  }
  const std::array<double, 4> d_area{-hp, -wp, hp, wp};
  std::array<double, 4> d_iou;
  for (int i = 0; i < 4; ++i) {
    const double d_uni = d_area[i] - d_inter[i];
    d_iou[i] = (d_inter[i] * uni - inter * d_uni) / (uni * uni);
  }

  // rho^2 / c^2 term.
  const Point cp = pred.centroid();
  const Point cg = gt.centroid();
  const double rho2 = center_distance_sq(pred, gt);
  const std::array<double, 4> d_rho2{cp.x - cg.x, cp.y - cg.y, cp.x - cg.x,
                                     cp.y - cg.y};
  const double cw = std::max(px2, gx2) - std::min(px1, gx1);
  const double ch = std::max(py2, gy2) - std::min(py1, gy1);
  const double c2 = cw * cw + ch * ch;
  std::array<double, 4> d_c2{
      -2.0 * cw * kink(px1, gx1, false), -2.0 * ch * kink(py1, gy1, false),
      2.0 * cw * kink(px2, gx2, true), 2.0 * ch * kink(py2, gy2, true)};

  // Aspect term; alpha is treated as a constant.
  const double aspect_gap =
      std::atan(gt.width() / gt.height()) - std::atan(wp / hp);
  const double v = (4.0 / (kPi * kPi)) * aspect_gap * aspect_gap;
  const double denom = (1.0 - iou_val) + v;
  const double alpha = denom > 0.0 ? v / denom : 0.0;
  const double dv_dw =
      (8.0 / (kPi * kPi)) * aspect_gap * (-hp / (wp * wp + hp * hp));
  const double dv_dh =
      (8.0 / (kPi * kPi)) * aspect_gap * (wp / (wp * wp + hp * hp));
  const std::array<double, 4> d_v{-dv_dw, -dv_dh, dv_dw, dv_dh};

  std::array<double, 4> grad;
  for (int i = 0; i < 4; ++i) {
    grad[i] = -d_iou[i] + (d_rho2[i] * c2 - rho2 * d_c2[i]) / (c2 * c2) +
              alpha * d_v[i];
  }
  return grad;
}

double bce_loss(double y, double p) {
  p = clamp_prob(p);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

double bce_grad(double y, double p) {
  p = clamp_prob(p);
  return -(y / p - (1.0 - y) / (1.0 - p));
}

double ce_loss(const std::vector<double>& y, const std::vector<double>& p) {
  if (y.size() != p.size()) {
    throw ValidationError("label and probability vectors differ in length");
  }
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("probability vector is not on the simplex");
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    loss -= y[c] * std::log(std::max(p[c], kProbEpsilon));
  }
  return loss;
}

std::vector<double> ce_grad(const std::vector<double>& y,
                            const std::vector<double>& p) {
  if (y.size() != p.size()) {
    throw ValidationError("label and probability vectors differ in length");
  }
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t c = 0; c < y.size(); ++c) {
    g[c] = -y[c] / std::max(p[c], kProbEpsilon);
  }
  return g;
}

double dfl_loss(double target, const DflBins& bins) {
  bins.validate();
  if (target < 0.0 || target > bins.reg_max) {
    throw ValidationError("DFL target outside [0, reg_max]");
  }
  int l = static_cast<int>(std::floor(target));
  if (l == bins.reg_max) l = bins.reg_max - 1;  // target == reg_max
  const int r = l + 1;
  const double wl = r - target;
  const double wr = target - l;
  return -(wl * std::log(std::max(bins.probs[l], kProbEpsilon)) +
           wr * std::log(std::max(bins.probs[r], kProbEpsilon)));
}

std::vector<double> dfl_grad(double target, const DflBins& bins) {
  bins.validate();
  if (target < 0.0 || target > bins.reg_max) {
    throw ValidationError("DFL target outside [0, reg_max]");
  }
  int l = static_cast<int>(std::floor(target));
  if (l == bins.reg_max) l = bins.reg_max - 1;
  const int r = l + 1;
  std::vector<double> g(bins.probs.size(), 0.0);
  g[l] = -(r - target) / std::max(bins.probs[l], kProbEpsilon);
  g[r] = -(target - l) / std::max(bins.probs[r], kProbEpsilon);
  return g;
}

LossBreakdown total_loss(double ciou, double obj, double cls, double dfl,
                         const LossWeights& w, Objective objective) {
  if (!(w.box >= 0 && w.obj >= 0 && w.cls >= 0 && w.dfl >= 0 && w.iou >= 0)) {
    throw ValidationError("loss weights must be non-negative and finite");
  }
  if (objective == Objective::kV8 && dfl != 0.0) {
    throw ValidationError(
        "v8 objective has no DFL term; refusing to drop a nonzero value");
  }
  LossBreakdown b{ciou, obj, cls, dfl, 0.0};
  b.total = w.box * ciou + w.obj * obj + w.cls * cls;
  if (objective == Objective::kV11) b.total += w.dfl * dfl;
  return b;
}

LossBreakdown mean_loss(const std::vector<LossBreakdown>& samples) {
  LossBreakdown m;
  if (samples.empty()) return m;
  for (const auto& s : samples) {
    m.ciou += s.ciou;
    m.obj += s.obj;
    m.cls += s.cls;
    m.dfl += s.dfl;
    m.total += s.total;
  }
  const double n = static_cast<double>(samples.size());
  m.ciou /= n;
  m.obj /= n;
  m.cls /= n;
  m.dfl /= n;
  m.total /= n;
  return m;
}

}  // namespace palletmap
