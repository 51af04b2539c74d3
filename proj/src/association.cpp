#include "palletmap/association.hpp"

#include "palletmap/error.hpp"
#include "palletmap/geometry.hpp"

namespace palletmap {

AssociationMethod association_method_from_string(const std::string& s) {
  if (s == "centroid") return AssociationMethod::kCentroid;
  if (s == "iou") return AssociationMethod::kIou;
  throw ConfigError("unknown association method '" + s + "'");
}

std::string to_string(AssociationMethod m) {
  return m == AssociationMethod::kCentroid ? "centroid" : "iou";
}

AssociationMap associate_centroid(const std::vector<Detection>& holes,
                                  const std::vector<Detection>& pallets) {
  AssociationMap map{AssociationMethod::kCentroid, 0.0, {}};
  map.links.reserve(holes.size());
  for (std::size_t h = 0; h < holes.size(); ++h) {
    const Point c = holes[h].box.centroid();
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    double best_dist = 0.0;
    for (std::size_t p = 0; p < pallets.size(); ++p) {
      if (!pallets[p].box.contains(c)) continue;
      const double ov = iou(holes[h].box, pallets[p].box);
      const double dist = center_distance_sq(holes[h].box, pallets[p].box);
      if (!best || ov > best_iou || (ov == best_iou && dist < best_dist)) {
        best = p;
        best_iou = ov;
        best_dist = dist;
      }
    }
    map.links.push_back({h, best, best ? 1.0 : 0.0});
  }
  return map;
}

AssociationMap associate_iou(const std::vector<Detection>& holes,
                             const std::vector<Detection>& pallets,
                             double tau) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must lie in [0,1]");
  AssociationMap map{AssociationMethod::kIou, tau, {}};
  map.links.reserve(holes.size());
  for (std::size_t h = 0; h < holes.size(); ++h) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t p = 0; p < pallets.size(); ++p) {
      const double ov = iou(holes[h].box, pallets[p].box);
      if (ov > best_iou) {
        best_iou = ov;
        best = p;
      }
    }
    // A zero-overlap pallet is never a parent, even at tau = 0.
    if (!best || best_iou < tau || best_iou <= 0.0) {
      map.links.push_back({h, std::nullopt, 0.0});
    } else {
      map.links.push_back({h, best, best_iou});
    }
  }
  return map;
}

AssociationMap associate(const std::vector<Detection>& holes,
                         const std::vector<Detection>& pallets,
                         const AssociationConfig& cfg) {
  switch (cfg.method) {
    case AssociationMethod::kCentroid:
      return associate_centroid(holes, pallets);
    case AssociationMethod::kIou:
      return associate_iou(holes, pallets, cfg.tau);
  }
  throw ConfigError("unknown association method");
}

}  // namespace palletmap
