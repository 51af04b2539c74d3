#include <doctest.h>

#include "oracles.hpp"
#include "palletmap/geometry.hpp"
#include "palletmap/rng.hpp"

using namespace palletmap;

TEST_CASE("centroid") {
  CHECK(BoundingBox(0, 0, 2, 2).centroid().x == doctest::Approx(1.0));
  CHECK(BoundingBox(0, 0, 2, 2).centroid().y == doctest::Approx(1.0));
  const Point c = BoundingBox(10, 30, 30, 50).centroid();
  CHECK(c.x == doctest::Approx(20.0));
  CHECK(c.y == doctest::Approx(40.0));
  // (0,0,W,H) -> (W/2, H/2)
  SplitMix64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const double w = rng.uniform(1.0, 500.0);
    const double h = rng.uniform(1.0, 500.0);
    const Point p = BoundingBox(0, 0, w, h).centroid();
    CHECK(p.x == doctest::Approx(w / 2));
    CHECK(p.y == doctest::Approx(h / 2));
  }
}

TEST_CASE("containment is boundary inclusive") {
  const BoundingBox outer(0, 0, 100, 60);
  CHECK(outer.contains({20, 40}));
  CHECK(outer.contains({100, 60}));
  CHECK(outer.contains({0, 0}));
  CHECK_FALSE(outer.contains({101, 40}));
  CHECK_FALSE(outer.contains({20, 60.001}));
}

TEST_CASE("iou basics") {
  const BoundingBox a(0, 0, 10, 10);
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0);
  CHECK(iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 0, 3, 2)) ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("enclosing diagonal squared") {
  const BoundingBox a(0, 0, 3, 4);
  CHECK(enclosing_diagonal_sq(a, a) == doctest::Approx(25.0));
  CHECK(enclosing_diagonal_sq(BoundingBox(0, 0, 1, 1), BoundingBox(2, 2, 3, 3)) ==
        doctest::Approx(18.0));
  // a inside b -> diagonal of b
  const BoundingBox inner(2, 2, 4, 4);
  const BoundingBox outer(0, 0, 10, 20);
  CHECK(enclosing_diagonal_sq(inner, outer) == doctest::Approx(100 + 400));
}

TEST_CASE("center distance squared") {
  const BoundingBox a(0, 0, 2, 2);
  CHECK(center_distance_sq(a, a) == 0.0);
  CHECK(center_distance_sq(BoundingBox(-1, -1, 1, 1), BoundingBox(2, 3, 4, 5)) ==
        doctest::Approx(25.0));
  SplitMix64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto b1 = oracles::random_box(rng);
    const auto b2 = oracles::random_box(rng);
    CHECK(center_distance_sq(b1, b2) == doctest::Approx(center_distance_sq(b2, b1)));
  }
}

TEST_CASE("degenerate boxes rejected at construction") {
  CHECK_THROWS_AS(BoundingBox(0, 0, 0, 1), ValidationError);
  CHECK_THROWS_AS(BoundingBox(0, 0, 1, 0), ValidationError);
  CHECK_THROWS_AS(BoundingBox(2, 0, 1, 1), ValidationError);
  const double nan = std::nan("");
  CHECK_THROWS_AS(BoundingBox(0, 0, nan, 1), ValidationError);
}

TEST_CASE("iou properties on random pairs") {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = oracles::random_box(rng);
    const auto b = oracles::random_box(rng);
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == iou(b, a));
    CHECK(enclosing_diagonal_sq(a, b) >=
          std::max(enclosing_diagonal_sq(a, a), enclosing_diagonal_sq(b, b)));
  }
}

TEST_CASE("iou equals 1 iff identical corners") {
  SplitMix64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto a = oracles::random_box(rng);
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    auto shifted = BoundingBox(a.x1() + 0.5, a.y1(), a.x2() + 0.5, a.y2());
    CHECK(iou(a, shifted) < 1.0);
  }
}

TEST_CASE("iou matches rational and raster oracles") {
  SplitMix64 rng(5);
  auto gen = [&rng] {
    // Extents well above the 0.25-px oracle grid keep its counting error
    // inside the stated tolerance.
    const double x1 = rng.uniform(0.0, 50.0);
    const double y1 = rng.uniform(0.0, 50.0);
    return BoundingBox(x1, y1, x1 + rng.uniform(8.0, 30.0),
                       y1 + rng.uniform(8.0, 30.0));
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = gen();
    const auto b = gen();
    const double v = iou(a, b);
    CHECK(std::abs(v - oracles::iou_rational(a, b)) < 1e-12);
    CHECK(std::abs(v - oracles::iou_raster(a, b)) < 2e-2);
  }
}

TEST_CASE("containment is translation equivariant") {
  SplitMix64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto outer = oracles::random_box(rng);
    const auto inner = oracles::random_box(rng);
    const double dx = rng.uniform(-50.0, 50.0);
    const double dy = rng.uniform(-50.0, 50.0);
    const BoundingBox outer2(outer.x1() + dx, outer.y1() + dy, outer.x2() + dx,
                             outer.y2() + dy);
    const BoundingBox inner2(inner.x1() + dx, inner.y1() + dy, inner.x2() + dx,
                             inner.y2() + dy);
    CHECK(outer.contains(inner.centroid()) == outer2.contains(inner2.centroid()));
  }
}
