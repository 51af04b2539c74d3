#pragma once

#include <algorithm>
#include <cmath>

#include "palletmap/error.hpp"

namespace palletmap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned box in continuous pixel coordinates, origin top-left.
// Degenerate boxes (zero width or height) are rejected at construction
// so downstream ratios never see a zero area.
class BoundingBox {
 public:
  BoundingBox(double x1, double y1, double x2, double y2)
      : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
    if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
          std::isfinite(y2))) {
      throw ValidationError("bounding box has non-finite coordinate");
    }
    if (!(x1 < x2 && y1 < y2)) {
      throw ValidationError("bounding box requires x1 < x2 and y1 < y2");
    }
  }

  double x1() const { return x1_; }
  double y1() const { return y1_; }
  double x2() const { return x2_; }
  double y2() const { return y2_; }

  double width() const { return x2_ - x1_; }
  double height() const { return y2_ - y1_; }
  double area() const { return width() * height(); }

  Point centroid() const {
    return {(x1_ + x2_) / 2.0, (y1_ + y2_) / 2.0};
  }

  // Boundary-inclusive containment.
  bool contains(const Point& p) const {
    return x1_ <= p.x && p.x <= x2_ && y1_ <= p.y && p.y <= y2_;
  }

  bool operator==(const BoundingBox& o) const {
    return x1_ == o.x1_ && y1_ == o.y1_ && x2_ == o.x2_ && y2_ == o.y2_;
  }

 private:
  double x1_, y1_, x2_, y2_;
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

// Squared diagonal of the smallest axis-aligned box covering both inputs.
inline double enclosing_diagonal_sq(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::max(a.x2(), b.x2()) - std::min(a.x1(), b.x1());
  const double h = std::max(a.y2(), b.y2()) - std::min(a.y1(), b.y1());
  return w * w + h * h;
}

inline double center_distance_sq(const BoundingBox& a, const BoundingBox& b) {
  const Point ca = a.centroid();
  const Point cb = b.centroid();
  const double dx = ca.x - cb.x;
  const double dy = ca.y - cb.y;
  return dx * dx + dy * dy;
}

}  // namespace palletmap
