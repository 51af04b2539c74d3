#include <doctest.h>

#include "oracles.hpp"
#include "palletmap/association.hpp"

using namespace palletmap;

namespace {

Detection det(ClassId cls, double x1, double y1, double x2, double y2,
              double conf = 0.9) {
  return {cls, BoundingBox(x1, y1, x2, y2), conf};
}

std::vector<Detection> random_dets(SplitMix64& rng, std::size_t n, ClassId cls) {
  std::vector<Detection> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({cls, oracles::random_box(rng), rng.next_double()});
  }
  return out;
}

}  // namespace

TEST_CASE("centroid association") {
  const auto pallets = std::vector<Detection>{det(0, 0, 0, 100, 60)};
  const auto holes = std::vector<Detection>{det(1, 10, 30, 30, 50)};
  const auto map = associate_centroid(holes, pallets);
  REQUIRE(map.links.size() == 1);
  CHECK(map.links[0].pallet_index == 0);
  CHECK(map.links[0].score == 1.0);

  const auto far = std::vector<Detection>{det(1, 200, 200, 210, 210)};
  CHECK_FALSE(associate_centroid(far, pallets).links[0].pallet_index.has_value());
}

TEST_CASE("centroid tie-break prefers tighter parent") {
  const std::vector<Detection> pallets = {det(0, 0, 0, 100, 100),
                                          det(0, 0, 0, 50, 50)};
  const std::vector<Detection> holes = {det(1, 10, 10, 20, 20)};
  const auto map = associate_centroid(holes, pallets);
  CHECK(map.links[0].pallet_index == 1);  // higher IoU with the smaller pallet
}

TEST_CASE("centroid tie-break falls through to center distance and index") {
  // Two identical pallets: IoU ties, center distance ties, lowest index wins.
  const std::vector<Detection> pallets = {det(0, 0, 0, 100, 100),
                                          det(0, 0, 0, 100, 100)};
  const std::vector<Detection> holes = {det(1, 40, 40, 60, 60)};
  CHECK(associate_centroid(holes, pallets).links[0].pallet_index == 0);

  // Same IoU (same size, both contain centroid), different center distance.
  const std::vector<Detection> pallets2 = {det(0, 0, 0, 80, 80),
                                           det(0, 10, 10, 90, 90)};
  const std::vector<Detection> holes2 = {det(1, 44, 44, 56, 56)};
  // hole center (50,50); pallet 0 center (40,40) dist^2 200; pallet 1
  // center (50,50) dist^2 0; IoU equal by symmetry.
  CHECK(associate_centroid(holes2, pallets2).links[0].pallet_index == 1);
}

TEST_CASE("if exactly one pallet contains the centroid it wins") {
  SplitMix64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto hole = det(1, 40, 40, 50, 50);
    const std::vector<Detection> pallets = {det(0, 0, 0, 100, 100),
                                            det(0, 200, 200, 300, 300)};
    const auto map = associate_centroid({hole}, pallets);
    CHECK(map.links[0].pallet_index == 0);
  }
}

TEST_CASE("iou association threshold") {
  const std::vector<Detection> pallets = {det(0, 0, 0, 100, 60)};
  const std::vector<Detection> holes = {det(1, 10, 30, 30, 50)};
  const auto assigned = associate_iou(holes, pallets, 0.05);
  REQUIRE(assigned.links[0].pallet_index == 0);
  CHECK(assigned.links[0].score == doctest::Approx(400.0 / 6000.0));
  CHECK_FALSE(associate_iou(holes, pallets, 0.10).links[0].pallet_index.has_value());
  CHECK(associate_iou(holes, {}, 0.05).links[0].pallet_index == std::nullopt);
}

TEST_CASE("iou association matches brute-force oracle") {
  SplitMix64 rng(22);
  for (int scene = 0; scene < 200; ++scene) {
    const auto holes = random_dets(rng, rng.next_below(21), 1);
    const auto pallets = random_dets(rng, rng.next_below(21), 0);
    const double tau = rng.uniform(0.0, 0.4);
    const auto map = associate_iou(holes, pallets, tau);
    const auto expected = oracles::associate_iou_bruteforce(holes, pallets, tau);
    REQUIRE(map.links.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(map.links[i].pallet_index == expected[i]);
    }
  }
}

TEST_CASE("association is translation equivariant") {
  SplitMix64 rng(23);
  for (int scene = 0; scene < 50; ++scene) {
    const auto holes = random_dets(rng, 5, 1);
    const auto pallets = random_dets(rng, 5, 0);
    const double dx = rng.uniform(-200.0, 200.0);
    const double dy = rng.uniform(-200.0, 200.0);
    auto shift = [&](const std::vector<Detection>& v) {
      std::vector<Detection> out;
      for (const auto& d : v) {
        out.push_back({d.class_id,
                       BoundingBox(d.box.x1() + dx, d.box.y1() + dy,
                                   d.box.x2() + dx, d.box.y2() + dy),
                       d.confidence});
      }
      return out;
    };
    for (auto method : {AssociationMethod::kCentroid, AssociationMethod::kIou}) {
      AssociationConfig cfg{method, 0.1};
      const auto a = associate(holes, pallets, cfg);
      const auto b = associate(shift(holes), shift(pallets), cfg);
      for (std::size_t i = 0; i < a.links.size(); ++i) {
        CHECK(a.links[i].pallet_index == b.links[i].pallet_index);
      }
    }
  }
}

TEST_CASE("iou association is scale invariant") {
  SplitMix64 rng(24);
  for (int scene = 0; scene < 50; ++scene) {
    const auto holes = random_dets(rng, 6, 1);
    const auto pallets = random_dets(rng, 6, 0);
    const double s = rng.uniform(0.5, 3.0);
    auto scale = [&](const std::vector<Detection>& v) {
      std::vector<Detection> out;
      for (const auto& d : v) {
        out.push_back({d.class_id,
                       BoundingBox(d.box.x1() * s, d.box.y1() * s,
                                   d.box.x2() * s, d.box.y2() * s),
                       d.confidence});
      }
      return out;
    };
    const auto a = associate_iou(holes, pallets, 0.1);
    const auto b = associate_iou(scale(holes), scale(pallets), 0.1);
    for (std::size_t i = 0; i < a.links.size(); ++i) {
      CHECK(a.links[i].pallet_index == b.links[i].pallet_index);
    }
  }
}

TEST_CASE("dispatch and config validation") {
  const std::vector<Detection> pallets = {det(0, 0, 0, 100, 60)};
  const std::vector<Detection> holes = {det(1, 10, 30, 30, 50)};
  AssociationConfig cfg;
  cfg.method = AssociationMethod::kCentroid;
  const auto a = associate(holes, pallets, cfg);
  const auto b = associate_centroid(holes, pallets);
  CHECK(a.links[0].pallet_index == b.links[0].pallet_index);
  CHECK(a.method == AssociationMethod::kCentroid);

  // tau = 0: any overlapping pallet is a parent, disjoint is not
  const std::vector<Detection> mixed = {det(1, 10, 30, 30, 50),
                                        det(1, 500, 500, 510, 510)};
  const auto m = associate_iou(mixed, pallets, 0.0);
  CHECK(m.links[0].pallet_index == 0);
  CHECK_FALSE(m.links[1].pallet_index.has_value());

  CHECK_THROWS_AS(association_method_from_string("nearest"), ConfigError);
  CHECK_THROWS_AS(associate_iou(holes, pallets, 1.5), ConfigError);

  // determinism
  AssociationConfig icfg{AssociationMethod::kIou, 0.05};
  const auto r1 = associate(holes, pallets, icfg);
  const auto r2 = associate(holes, pallets, icfg);
  CHECK(r1.links[0].pallet_index == r2.links[0].pallet_index);
  CHECK(r1.links[0].score == r2.links[0].score);
}
