// Independent test oracles. These deliberately avoid the library's own
// computation paths: rational arithmetic for IoU, subpixel counting for
// areas, exhaustive enumeration for AP and association.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "palletmap/annotation.hpp"
#include "palletmap/geometry.hpp"
#include "palletmap/rng.hpp"

namespace oracles {

using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(double v) { return Rational(v); }

// Exact IoU: every double is a rational, so this is exact arithmetic.
inline double iou_rational(const palletmap::BoundingBox& a,
                           const palletmap::BoundingBox& b) {
  const Rational ax1 = rat(a.x1()), ay1 = rat(a.y1()), ax2 = rat(a.x2()),
                 ay2 = rat(a.y2());
  const Rational bx1 = rat(b.x1()), by1 = rat(b.y1()), bx2 = rat(b.x2()),
                 by2 = rat(b.y2());
  const Rational iw = std::min(ax2, bx2) - std::max(ax1, bx1);
  const Rational ih = std::min(ay2, by2) - std::max(ay1, by1);
  Rational inter = 0;
  if (iw > 0 && ih > 0) inter = iw * ih;
  const Rational uni =
      (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
  return static_cast<double>(inter / uni);
}

// Counting oracle: rasterize both boxes on a 0.25-px grid and count
// subpixel centers inside each region.
inline double iou_raster(const palletmap::BoundingBox& a,
                         const palletmap::BoundingBox& b) {
  const double step = 0.25;
  const double x_lo = std::min(a.x1(), b.x1()) - step;
  const double x_hi = std::max(a.x2(), b.x2()) + step;
  const double y_lo = std::min(a.y1(), b.y1()) - step;
  const double y_hi = std::max(a.y2(), b.y2()) + step;
  long long in_a = 0, in_b = 0, in_both = 0;
  for (double y = y_lo + step / 2; y < y_hi; y += step) {
    for (double x = x_lo + step / 2; x < x_hi; x += step) {
      const bool pa = x > a.x1() && x < a.x2() && y > a.y1() && y < a.y2();
      const bool pb = x > b.x1() && x < b.x2() && y > b.y1() && y < b.y2();
      in_a += pa;
      in_b += pb;
      in_both += pa && pb;
    }
  }
  const long long uni = in_a + in_b - in_both;
  return uni > 0 ? static_cast<double>(in_both) / static_cast<double>(uni)
                 : 0.0;
}

inline palletmap::BoundingBox random_box(palletmap::SplitMix64& rng,
                                         double extent = 100.0) {
  const double x1 = rng.uniform(0.0, extent);
  const double y1 = rng.uniform(0.0, extent);
  return {x1, y1, x1 + rng.uniform(1.0, extent / 2),
          y1 + rng.uniform(1.0, extent / 2)};
}

// 101-point AP from (confidence, tp) points by direct envelope scanning.
// Points must already be globally sorted by descending confidence.
inline double ap_enumeration(const std::vector<std::pair<double, bool>>& points,
                             std::size_t gt_count) {
  if (points.empty()) return 0.0;
  std::vector<double> prec, rec;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    tp += points[i].second ? 1 : 0;
    prec.push_back(double(tp) / double(i + 1));
    rec.push_back(double(tp) / double(gt_count));
  }
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = r == 0.0 ? 1.0 : 0.0;  // (recall 0, precision 1) anchor
    for (std::size_t i = 0; i < prec.size(); ++i) {
      if (rec[i] >= r && prec[i] > best) best = prec[i];
    }
    sum += best;
  }
  return sum / 101.0;
}

// Brute-force argmax+threshold association over all (hole, pallet) pairs.
inline std::vector<std::optional<std::size_t>> associate_iou_bruteforce(
    const std::vector<palletmap::Detection>& holes,
    const std::vector<palletmap::Detection>& pallets, double tau) {
  std::vector<std::optional<std::size_t>> out;
  for (const auto& hole : holes) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t p = 0; p < pallets.size(); ++p) {
      const double ov = palletmap::iou(hole.box, pallets[p].box);
      if (ov > best_iou) {
        best_iou = ov;
        best = p;
      }
    }
    if (best && best_iou >= tau && best_iou > 0.0) {
      out.push_back(best);
    } else {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace oracles
