#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "palletmap/geometry.hpp"

namespace palletmap {

using ClassId = int;

inline constexpr ClassId kClassPallet = 0;
inline constexpr ClassId kClassPalletHole = 1;
inline constexpr int kDefaultClassCount = 2;

// YOLO-format label line: class id plus normalized center/size.
struct NormalizedAnnotation {
  ClassId class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct GroundTruth {
  ClassId class_id;
  BoundingBox box;
};

struct Detection {
  ClassId class_id;
  BoundingBox box;
  double confidence;
};

// Raw grid-tensor prediction block, per-cell layout
// (x, y, w, h, objectness, class probs), row-major by (row, col, slot).
struct GridPrediction {
  int grid_size = 0;       // S
  int boxes_per_cell = 1;  // B
  int class_count = 0;     // C
  std::vector<double> values;

  int stride() const { return 5 + class_count; }
  void validate() const;
};

struct ManifestImage {
  std::string id;
  int width = 0;
  int height = 0;
  std::string labels;  // label-file path
  std::string split;   // train | val | test
};

struct DatasetManifest {
  std::vector<std::string> classes;
  std::vector<ManifestImage> images;
};

struct SplitFractions {
  double train = 0.75;
  double val = 0.10;
  double test = 0.15;
};

std::vector<GroundTruth> parse_labels(const std::string& text, double img_w,
                                      double img_h,
                                      int class_count = kDefaultClassCount);

std::vector<Detection> parse_predictions(const std::string& text, double img_w,
                                         double img_h,
                                         int class_count = kDefaultClassCount);

std::string serialize_labels(const std::vector<GroundTruth>& gts, double img_w,
                             double img_h);

std::string serialize_predictions(const std::vector<Detection>& dets,
                                  double img_w, double img_h);

NormalizedAnnotation normalize(ClassId cls, const BoundingBox& box,
                               double img_w, double img_h);

BoundingBox denormalize(const NormalizedAnnotation& ann, double img_w,
                        double img_h);

// Confidence per slot is objectness times the max class probability;
// (x, y, w, h) are normalized image coordinates, no cell-offset arithmetic.
std::vector<Detection> decode_grid(const GridPrediction& g, double img_w,
                                   double img_h, double conf_thresh);

GridPrediction parse_grid(const std::string& text);
std::string serialize_grid(const GridPrediction& g);

DatasetManifest split_manifest(std::vector<ManifestImage> entries,
                               const SplitFractions& fractions,
                               std::uint64_t seed,
                               std::vector<std::string> classes);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

}  // namespace palletmap
