#pragma once

#include <optional>
#include <string>
#include <vector>

#include "palletmap/annotation.hpp"

namespace palletmap {

enum class AssociationMethod { kCentroid, kIou };

AssociationMethod association_method_from_string(const std::string& s);
std::string to_string(AssociationMethod m);

struct AssociationLink {
  std::size_t hole_index;
  std::optional<std::size_t> pallet_index;  // nullopt = UNASSIGNED
  double score = 0.0;
};

struct AssociationMap {
  AssociationMethod method;
  double tau = 0.0;  // only meaningful for the IoU method
  std::vector<AssociationLink> links;
};

struct AssociationConfig {
  AssociationMethod method = AssociationMethod::kCentroid;
  double tau = 0.05;
};

// Hole i -> the pallet whose box contains the hole centroid. Ties between
// containing pallets break by max IoU, then min center distance, then
// lowest pallet index.
AssociationMap associate_centroid(const std::vector<Detection>& holes,
                                  const std::vector<Detection>& pallets);

// Hole i -> argmax-IoU pallet, provided the max IoU >= tau. Exact IoU
// ties break by lowest pallet index.
AssociationMap associate_iou(const std::vector<Detection>& holes,
                             const std::vector<Detection>& pallets, double tau);

AssociationMap associate(const std::vector<Detection>& holes,
                         const std::vector<Detection>& pallets,
                         const AssociationConfig& cfg);

}  // namespace palletmap
