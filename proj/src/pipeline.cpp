#include "palletmap/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "palletmap/error.hpp"

namespace fs = std::filesystem;

namespace palletmap {

namespace {

fs::path resolve_relative(const std::string& manifest_path,
                          const std::string& ref) {
  const fs::path p(ref);
  if (p.is_absolute()) return p;
  return fs::path(manifest_path).parent_path() / p;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

ValidationReport validate_manifest(const std::string& manifest_path) {
  ValidationReport report;
  DatasetManifest manifest;
  try {
    manifest = manifest_from_json(read_file(manifest_path));
  } catch (const std::exception& e) {
    report.findings.push_back({manifest_path, e.what()});
    return report;
  }
  const int class_count = static_cast<int>(manifest.classes.size());
  for (const auto& img : manifest.images) {
    ++report.images_checked;
    const auto label_path = resolve_relative(manifest_path, img.labels);
    std::string text;
    try {
      text = read_file(label_path.string());
    } catch (const IoError& e) {
      report.findings.push_back({label_path.string(), e.what()});
      continue;
    }
    try {
      parse_labels(text, img.width, img.height, class_count);
    } catch (const std::exception& e) {
      report.findings.push_back({label_path.string(), e.what()});
    }
  }
  return report;
}

std::string association_to_json(const std::string& image_id,
                                const AssociationMap& map) {
  nlohmann::json j;
  j["image_id"] = image_id;
  j["method"] = to_string(map.method);
  j["tau"] = map.tau;
  j["links"] = nlohmann::json::array();
  for (const auto& link : map.links) {
    nlohmann::json l;
    l["hole"] = link.hole_index;
    if (link.pallet_index) {
      l["pallet"] = *link.pallet_index;
    } else {
      l["pallet"] = nullptr;
    }
    l["score"] = link.score;
    j["links"].push_back(l);
  }
  return j.dump(2) + "\n";
}

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["map50"] = report.map50;
  j["map50_95"] = report.map50_95;
  j["per_class"] = nlohmann::json::array();
  for (const auto& cr : report.per_class) {
    nlohmann::json c;
    c["class_id"] = cr.class_id;
    if (cr.accuracy) c["accuracy"] = *cr.accuracy;
    c["precision"] = cr.precision;
    c["recall"] = cr.recall;
    c["f1_at_best_conf"] = cr.f1_at_best_conf;
    c["best_conf"] = cr.best_conf;
    if (cr.ap50) c["ap50"] = *cr.ap50;
    if (cr.ap50_95) c["ap50_95"] = *cr.ap50_95;
    j["per_class"].push_back(c);
  }
  const auto& cm = report.confusion;
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r <= cm.class_count(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c <= cm.class_count(); ++c) row.push_back(cm.at(r, c));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  return j.dump(2) + "\n";
}

std::string curves_to_csv(const EvalReport& report) {
  std::string out = "class,conf_thresh,precision,recall,f1\n";
  char buf[128];
  for (std::size_t c = 0; c < report.curves.size(); ++c) {
    for (const auto& s : report.curves[c]) {
      std::snprintf(buf, sizeof(buf), "%zu,%.4f,%.6f,%.6f,%.6f\n", c,
                    s.conf_thresh, s.precision, s.recall, s.f1);
      out += buf;
    }
  }
  return out;
}

PipelineResult run_pipeline(const std::string& manifest_path,
                            const std::string& predictions_dir,
                            const PipelineOptions& options) {
  const DatasetManifest manifest = manifest_from_json(read_file(manifest_path));
  const int class_count = static_cast<int>(manifest.classes.size());

  PipelineResult result;
  std::vector<ImageSample> samples;
  nlohmann::json associations = nlohmann::json::array();

  for (const auto& img : manifest.images) {
    const fs::path pred_path = fs::path(predictions_dir) / (img.id + ".txt");
    if (!fs::exists(pred_path)) {
      ++result.images_skipped;
      continue;
    }
    const auto label_path = resolve_relative(manifest_path, img.labels);
    ImageSample sample;
    sample.gts = parse_labels(read_file(label_path.string()), img.width,
                              img.height, class_count);
    sample.preds = parse_predictions(read_file(pred_path.string()), img.width,
                                     img.height, class_count);

    std::vector<Detection> holes, pallets;
    for (const auto& d : sample.preds) {
      (d.class_id == kClassPalletHole ? holes : pallets).push_back(d);
    }
    const AssociationMap map = associate(holes, pallets, options.assoc);
    associations.push_back(
        nlohmann::json::parse(association_to_json(img.id, map)));

    samples.push_back(std::move(sample));
    ++result.images_evaluated;
  }

  const EvalReport report =
      evaluate(samples, options.iou_thresh, options.conf_thresh, class_count);
  nlohmann::json eval = nlohmann::json::parse(eval_report_to_json(report));
  eval["images_evaluated"] = result.images_evaluated;
  eval["images_skipped"] = result.images_skipped;
  const auto thresholds = options.map_thresholds.empty()
                              ? coco_iou_thresholds()
                              : options.map_thresholds;
  eval["map_range"] = map_range(samples, thresholds, class_count);

  result.association_json = associations.dump(2) + "\n";
  result.evaluation_json = eval.dump(2) + "\n";
  return result;
}

}  // namespace palletmap
