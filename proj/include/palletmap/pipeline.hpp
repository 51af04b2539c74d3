#pragma once

#include <string>
#include <vector>

#include "palletmap/association.hpp"
#include "palletmap/evaluation.hpp"

namespace palletmap {

struct ValidationFinding {
  std::string file;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  int images_checked = 0;
  bool ok() const { return findings.empty(); }
};

// Checks every label file referenced by the manifest; collects findings
// instead of failing fast.
ValidationReport validate_manifest(const std::string& manifest_path);

struct PipelineOptions {
  AssociationConfig assoc;
  double iou_thresh = 0.5;
  double conf_thresh = 0.25;
  std::vector<double> map_thresholds;  // empty = COCO 0.50:0.95 range
};

struct PipelineResult {
  std::string association_json;
  std::string evaluation_json;
  int images_evaluated = 0;
  int images_skipped = 0;  // missing prediction files
};

// Ingestion -> association -> evaluation over every manifest image with a
// "<id>.txt" prediction file in predictions_dir. Output is deterministic:
// images processed in manifest order, merges independent of scheduling.
PipelineResult run_pipeline(const std::string& manifest_path,
                            const std::string& predictions_dir,
                            const PipelineOptions& options);

std::string association_to_json(const std::string& image_id,
                                const AssociationMap& map);
std::string eval_report_to_json(const EvalReport& report);
std::string curves_to_csv(const EvalReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace palletmap
