// Command-line front end for the pallet perception post-processing
// pipeline. Exit codes: 0 success, 1 validation findings, 2 usage error,
// 3 I/O error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "palletmap/association.hpp"
#include "palletmap/augment.hpp"
#include "palletmap/config.hpp"
#include "palletmap/error.hpp"
#include "palletmap/evaluation.hpp"
#include "palletmap/gradcheck.hpp"
#include "palletmap/objectives.hpp"
#include "palletmap/pipeline.hpp"
#include "palletmap/tuner.hpp"

namespace fs = std::filesystem;
using namespace palletmap;

namespace {

// Flat or nested JSON config: {"evaluate": {"iou-thresh": 0.6}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    nlohmann::json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_lnames().empty() && opt->get_configurable()) {
        const std::string name = opt->get_lnames()[0];
        if (opt->count() == 1) {
          j[name] = opt->results().at(0);
        } else if (opt->count() > 1) {
          j[name] = opt->results();
        } else if (default_also && !opt->get_default_str().empty()) {
          j[name] = opt->get_default_str();
        }
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    input >> j;
    return collect(j, {});
  }

 private:
  static std::vector<CLI::ConfigItem> collect(const nlohmann::json& j,
                                              std::vector<std::string> prefix) {
    std::vector<CLI::ConfigItem> results;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = prefix;
        nested.push_back(key);
        auto sub = collect(value, nested);
        results.insert(results.end(), sub.begin(), sub.end());
        continue;
      }
      CLI::ConfigItem item;
      item.parents = prefix;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) {
          item.inputs.push_back(v.is_string() ? v.get<std::string>()
                                              : v.dump());
        }
      } else {
        item.inputs.push_back(value.is_string() ? value.get<std::string>()
                                                : value.dump());
      }
      results.push_back(item);
    }
    return results;
  }
};

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

std::string trial_to_json_line(const TrialRecord& t) {
  nlohmann::json j;
  j["id"] = t.id;
  j["params"] = t.params;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& [step, value] : t.intermediates) {
    steps.push_back({{"step", step}, {"value", value}});
  }
  j["intermediates"] = steps;
  if (t.final_value) {
    j["final_value"] = *t.final_value;
  } else {
    j["final_value"] = nullptr;
  }
  switch (t.state) {
    case TrialState::kComplete: j["state"] = "complete"; break;
    case TrialState::kPruned: j["state"] = "pruned"; break;
    case TrialState::kFailed: j["state"] = "failed"; break;
    case TrialState::kRunning: j["state"] = "running"; break;
  }
  return j.dump();
}

ParamSpace space_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("space: ") + e.what());
  }
  ParamSpace space;
  for (const auto& [name, spec] : j.items()) {
    ParamRange r;
    r.name = name;
    r.lower = spec.at("lower").get<double>();
    r.upper = spec.at("upper").get<double>();
    const std::string scale = spec.value("scale", "linear");
    if (scale == "linear") {
      r.scale = ParamScale::kLinear;
    } else if (scale == "log") {
      r.scale = ParamScale::kLog;
    } else {
      throw ConfigError("space: unknown scale '" + scale + "'");
    }
    space.params.push_back(r);
  }
  space.validate();
  return space;
}

AugmentationSpec aug_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("spec: ") + e.what());
  }
  AugmentationSpec spec;
  spec.hflip = j.value("hflip", false);
  spec.vflip = j.value("vflip", false);
  spec.zoom_max = j.value("zoom_max", 1.19);
  spec.blur_sigma_max = j.value("blur_sigma_max", 1.1);
  spec.noise_fraction_max = j.value("noise_fraction_max", 0.0049);
  spec.seed = j.value("seed", 0ULL);
  spec.validate();
  return spec;
}

int cmd_validate(const std::string& manifest, const std::string& out) {
  const ValidationReport report = validate_manifest(manifest);
  nlohmann::json j;
  j["ok"] = report.ok();
  j["images_checked"] = report.images_checked;
  j["findings"] = nlohmann::json::array();
  for (const auto& f : report.findings) {
    j["findings"].push_back({{"file", f.file}, {"message", f.message}});
  }
  emit(j.dump(2) + "\n", out);
  return report.ok() ? kExitOk : kExitFindings;
}

int cmd_associate(const std::string& predictions, double width, double height,
                  const std::string& image_id, const std::string& method,
                  double tau, const std::string& out) {
  const auto dets =
      parse_predictions(read_file(predictions), width, height);
  std::vector<Detection> holes, pallets;
  for (const auto& d : dets) {
    (d.class_id == kClassPalletHole ? holes : pallets).push_back(d);
  }
  AssociationConfig cfg;
  cfg.method = association_method_from_string(method);
  cfg.tau = tau;
  const AssociationMap map = associate(holes, pallets, cfg);
  emit(association_to_json(image_id, map), out);
  return kExitOk;
}

int cmd_evaluate(const std::string& manifest, const std::string& pred_dir,
                 double iou_thresh, double conf_thresh, bool with_map_range,
                 const std::string& out, const std::string& curves_csv) {
  const DatasetManifest m = manifest_from_json(read_file(manifest));
  const int class_count = static_cast<int>(m.classes.size());
  std::vector<ImageSample> samples;
  int skipped = 0;
  for (const auto& img : m.images) {
    const fs::path pred_path = fs::path(pred_dir) / (img.id + ".txt");
    if (!fs::exists(pred_path)) {
      ++skipped;
      continue;
    }
    const fs::path label_path =
        fs::path(img.labels).is_absolute()
            ? fs::path(img.labels)
            : fs::path(manifest).parent_path() / img.labels;
    ImageSample s;
    s.gts = parse_labels(read_file(label_path.string()), img.width, img.height,
                         class_count);
    s.preds = parse_predictions(read_file(pred_path.string()), img.width,
                                img.height, class_count);
    samples.push_back(std::move(s));
  }
  const EvalReport report =
      evaluate(samples, iou_thresh, conf_thresh, class_count);
  nlohmann::json j = nlohmann::json::parse(eval_report_to_json(report));
  j["images_evaluated"] = static_cast<int>(samples.size());
  j["images_skipped"] = skipped;
  if (with_map_range) {
    j["map_range"] = map_range(samples, coco_iou_thresholds(), class_count);
  }
  emit(j.dump(2) + "\n", out);
  if (!curves_csv.empty()) write_file(curves_csv, curves_to_csv(report));
  return kExitOk;
}

int cmd_augment(const std::string& spec_path, const std::string& in_dir,
                const std::string& out_dir) {
  const AugmentationSpec spec = aug_spec_from_json(read_file(spec_path));
  fs::create_directories(out_dir);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    const auto ext = entry.path().extension().string();
    if (ext == ".ppm" || ext == ".pgm") inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Raster img = read_pnm(inputs[i].string());
    std::vector<NormalizedAnnotation> anns;
    const fs::path label_path = fs::path(inputs[i]).replace_extension(".txt");
    if (fs::exists(label_path)) {
      const auto gts = parse_labels(read_file(label_path.string()), img.width,
                                    img.height);
      for (const auto& gt : gts) {
        anns.push_back(normalize(gt.class_id, gt.box, img.width, img.height));
      }
    }
    // Stream index is a stable hash of the file name, not the loop index,
    // so adding files does not reshuffle existing outputs.
    std::uint64_t stream = 1469598103934665603ULL;
    for (char c : inputs[i].filename().string()) {
      stream = (stream ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    }
    const AugmentedImage result = augment(img, anns, spec, stream);
    const fs::path out_img = fs::path(out_dir) / inputs[i].filename();
    write_pnm(out_img.string(), result.image);
    std::vector<GroundTruth> out_gts;
    for (const auto& a : result.annotations) {
      out_gts.push_back({a.class_id, denormalize(a, img.width, img.height)});
    }
    write_file(fs::path(out_img).replace_extension(".txt").string(),
               serialize_labels(out_gts, img.width, img.height));
  }
  return kExitOk;
}

int cmd_tune(const std::string& space_path, const std::string& objective_name,
             int trials, std::uint64_t seed, const std::string& out) {
  const NamedObjective objective = make_objective(objective_name);
  ParamSpace space = objective.default_space;
  if (!space_path.empty()) space = space_from_json(read_file(space_path));
  StudyConfig cfg;
  cfg.n_trials = trials;
  cfg.seed = seed;
  const StudyResult result = run_study(space, cfg, objective.fn);
  std::string lines;
  for (const auto& t : result.history) lines += trial_to_json_line(t) + "\n";
  emit(lines, out);
  std::cerr << "best trial " << result.best.id << " value "
            << *result.best.final_value << "\n";
  return kExitOk;
}

int cmd_losscheck(int samples, std::uint64_t seed, const std::string& out) {
  const auto reports = run_gradient_checks(samples, seed);
  emit(grad_check_to_json(reports), out);
  for (const auto& r : reports) {
    if (!r.pass) return kExitFindings;
  }
  return kExitOk;
}

int cmd_pipeline(const std::string& manifest, const std::string& pred_dir,
                 const std::string& method, double tau, double iou_thresh,
                 double conf_thresh, const std::string& out_assoc,
                 const std::string& out_eval) {
  PipelineOptions options;
  options.assoc.method = association_method_from_string(method);
  options.assoc.tau = tau;
  options.iou_thresh = iou_thresh;
  options.conf_thresh = conf_thresh;
  const PipelineResult result = run_pipeline(manifest, pred_dir, options);
  emit(result.association_json, out_assoc);
  emit(result.evaluation_json, out_eval);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pallet / pallet-hole detection post-processing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "JSON config file mirroring the flags");
  app.config_formatter(std::make_shared<JsonConfig>());

  std::string manifest, pred_dir, predictions, image_id = "image";
  std::string method = "centroid", out, out_assoc, out_eval, curves_csv;
  std::string spec_path, in_dir, out_dir, space_path, objective = "quadratic";
  double tau = 0.05, iou_thresh = 0.5, conf_thresh = 0.25;
  double width = 640, height = 640;
  int trials = 20, samples = 500;
  std::uint64_t seed = 0;
  bool with_map_range = false;

  auto* validate = app.add_subcommand("validate", "Check a dataset manifest");
  validate->add_option("--manifest", manifest, "Manifest JSON path")
      ->required()
      ->envname("PALLETMAP_MANIFEST");
  validate->add_option("--out", out, "Report path (default stdout)");

  auto* assoc = app.add_subcommand("associate", "Link holes to pallets");
  assoc->add_option("--predictions", predictions, "Prediction file")->required();
  assoc->add_option("--width", width, "Image width in pixels")->required();
  assoc->add_option("--height", height, "Image height in pixels")->required();
  assoc->add_option("--image-id", image_id, "Image id for the report");
  assoc->add_option("--method", method, "centroid or iou");
  assoc->add_option("--tau", tau, "IoU threshold (iou method)");
  assoc->add_option("--out", out, "Output path (default stdout)");

  auto* eval = app.add_subcommand("evaluate", "Detection metrics");
  eval->add_option("--manifest", manifest)->required()
      ->envname("PALLETMAP_MANIFEST");
  eval->add_option("--predictions", pred_dir, "Prediction directory")
      ->required();
  eval->add_option("--iou-thresh", iou_thresh);
  eval->add_option("--conf-thresh", conf_thresh);
  eval->add_flag("--map-range", with_map_range, "Include mAP@0.5:0.95");
  eval->add_option("--out", out);
  eval->add_option("--curves-csv", curves_csv, "F1 curve samples as CSV");

  auto* aug = app.add_subcommand("augment", "Annotation-aware augmentation");
  aug->add_option("--spec", spec_path, "Augmentation spec JSON")->required();
  aug->add_option("--in", in_dir, "Input directory (P5/P6 + labels)")
      ->required();
  aug->add_option("--out", out_dir, "Output directory")->required();

  auto* tune = app.add_subcommand("tune", "TPE study with median pruning");
  tune->add_option("--space", space_path, "Space JSON (default per objective)");
  tune->add_option("--objective", objective, "quadratic or assoc_eval");
  tune->add_option("--trials", trials);
  tune->add_option("--seed", seed)->envname("PALLETMAP_SEED");
  tune->add_option("--out", out, "History JSONL path (default stdout)");

  auto* losscheck = app.add_subcommand("losscheck", "Gradient verification");
  losscheck->add_option("--samples", samples);
  losscheck->add_option("--seed", seed)->envname("PALLETMAP_SEED");
  losscheck->add_option("--out", out);

  auto* pipeline = app.add_subcommand("pipeline", "Ingest, associate, evaluate");
  pipeline->add_option("--manifest", manifest)->required()
      ->envname("PALLETMAP_MANIFEST");
  pipeline->add_option("--predictions", pred_dir)->required();
  pipeline->add_option("--method", method, "Association method");
  pipeline->add_option("--tau", tau);
  pipeline->add_option("--iou-thresh", iou_thresh);
  pipeline->add_option("--conf-thresh", conf_thresh);
  pipeline->add_option("--out-assoc", out_assoc)->required();
  pipeline->add_option("--out-eval", out_eval)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(manifest, out);
    if (assoc->parsed()) {
      return cmd_associate(predictions, width, height, image_id, method, tau,
                           out);
    }
    if (eval->parsed()) {
      return cmd_evaluate(manifest, pred_dir, iou_thresh, conf_thresh,
                          with_map_range, out, curves_csv);
    }
    if (aug->parsed()) return cmd_augment(spec_path, in_dir, out_dir);
    if (tune->parsed()) return cmd_tune(space_path, objective, trials, seed, out);
    if (losscheck->parsed()) return cmd_losscheck(samples, seed, out);
    if (pipeline->parsed()) {
      return cmd_pipeline(manifest, pred_dir, method, tau, iou_thresh,
                          conf_thresh, out_assoc, out_eval);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFindings;
  }
  return kExitUsage;
}
