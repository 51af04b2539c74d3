#pragma once

#include <array>
#include <vector>

#include "palletmap/geometry.hpp"

namespace palletmap {

inline constexpr double kProbEpsilon = 1e-7;

enum class Objective { kV8, kV11 };

struct LossWeights {
  double box = 1.0;
  double obj = 1.0;
  double cls = 1.0;
  double dfl = 1.0;
  double iou = 0.0;  // tuned separately in some configs; opaque to the objective
};

struct CiouTerms {
  double iou = 0.0;
  double center_dist_sq = 0.0;      // rho^2
  double enclosing_diag_sq = 0.0;   // c^2
  double aspect_term = 0.0;         // v
  double alpha = 0.0;
  double loss = 0.0;
};

struct LossBreakdown {
  double ciou = 0.0;
  double obj = 0.0;
  double cls = 0.0;
  double dfl = 0.0;
  double total = 0.0;
};

// Coordinate distribution over integer bins 0..reg_max.
struct DflBins {
  int reg_max = 16;
  std::vector<double> probs;  // reg_max + 1 entries on the simplex

  void validate() const;
};

// 1 - IoU + rho^2/c^2 + alpha*v, with
// v = (4/pi^2)(atan(w_gt/h_gt) - atan(w/h))^2 and alpha = v/((1-IoU)+v).
CiouTerms ciou_loss(const BoundingBox& pred, const BoundingBox& gt);

// Analytic gradient w.r.t. pred (x1, y1, x2, y2); alpha is held constant.
// One-sided at corner-touching configurations.
std::array<double, 4> ciou_grad(const BoundingBox& pred, const BoundingBox& gt);

double bce_loss(double y, double p);
double bce_grad(double y, double p);  // d loss / d p

double ce_loss(const std::vector<double>& y, const std::vector<double>& p);
std::vector<double> ce_grad(const std::vector<double>& y,
                            const std::vector<double>& p);

double dfl_loss(double target, const DflBins& bins);
std::vector<double> dfl_grad(double target, const DflBins& bins);

LossBreakdown total_loss(double ciou, double obj, double cls, double dfl,
                         const LossWeights& w, Objective objective);

// Arithmetic mean over per-sample breakdowns.
LossBreakdown mean_loss(const std::vector<LossBreakdown>& samples);

}  // namespace palletmap
