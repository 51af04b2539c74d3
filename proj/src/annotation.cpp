#include "palletmap/annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "palletmap/rng.hpp"

#include <nlohmann/json.hpp>

namespace palletmap {

namespace {

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_field(const std::string& tok, int line_no, const char* name) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": field '" + name +
                     "' is not a number: '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": field '" + name +
                     "' has trailing characters: '" + tok + "'");
  }
  return v;
}

NormalizedAnnotation parse_ann_fields(const std::vector<std::string>& f,
                                      int line_no, int class_count) {
  NormalizedAnnotation ann;
  const double cls = parse_field(f[0], line_no, "class");
  if (cls != std::floor(cls) || cls < 0) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": class id must be a non-negative integer");
  }
  ann.class_id = static_cast<ClassId>(cls);
  if (ann.class_id >= class_count) {
    throw ValidationError("line " + std::to_string(line_no) + ": class id " +
                          std::to_string(ann.class_id) + " out of range (C=" +
                          std::to_string(class_count) + ")");
  }
  ann.cx = parse_field(f[1], line_no, "cx");
  ann.cy = parse_field(f[2], line_no, "cy");
  ann.w = parse_field(f[3], line_no, "w");
  ann.h = parse_field(f[4], line_no, "h");
  const char* names[] = {"cx", "cy", "w", "h"};
  const double vals[] = {ann.cx, ann.cy, ann.w, ann.h};
  for (int i = 0; i < 4; ++i) {
    if (vals[i] < 0.0 || vals[i] > 1.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": field '" +
                            names[i] + "' outside [0,1]");
    }
  }
  if (ann.w <= 0.0 || ann.h <= 0.0) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": box extent must be positive");
  }
  return ann;
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::istringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line, line_no);
  }
}

}  // namespace

void GridPrediction::validate() const {
  if (grid_size <= 0 || boxes_per_cell <= 0 || class_count <= 0) {
    throw ValidationError("grid prediction dimensions must be positive");
  }
  const std::size_t expect = static_cast<std::size_t>(grid_size) * grid_size *
                             boxes_per_cell * stride();
  if (values.size() != expect) {
    throw ValidationError("grid block length " + std::to_string(values.size()) +
                          " does not match S*S*B*(5+C) = " +
                          std::to_string(expect));
  }
}

BoundingBox denormalize(const NormalizedAnnotation& ann, double img_w,
                        double img_h) {
  return BoundingBox((ann.cx - ann.w / 2.0) * img_w,
                     (ann.cy - ann.h / 2.0) * img_h,
                     (ann.cx + ann.w / 2.0) * img_w,
                     (ann.cy + ann.h / 2.0) * img_h);
}

NormalizedAnnotation normalize(ClassId cls, const BoundingBox& box,
                               double img_w, double img_h) {
  const double x1 = std::clamp(box.x1() / img_w, 0.0, 1.0);
  const double y1 = std::clamp(box.y1() / img_h, 0.0, 1.0);
  const double x2 = std::clamp(box.x2() / img_w, 0.0, 1.0);
  const double y2 = std::clamp(box.y2() / img_h, 0.0, 1.0);
  return {cls, (x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1};
}

std::vector<GroundTruth> parse_labels(const std::string& text, double img_w,
                                      double img_h, int class_count) {
  std::vector<GroundTruth> out;
  for_each_line(text, [&](const std::string& line, int line_no) {
    const auto f = split_fields(line);
    if (f.size() != 5) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields"
                       " (class cx cy w h), got " + std::to_string(f.size()));
    }
    const auto ann = parse_ann_fields(f, line_no, class_count);
    out.push_back({ann.class_id, denormalize(ann, img_w, img_h)});
  });
  return out;
}

std::vector<Detection> parse_predictions(const std::string& text, double img_w,
                                         double img_h, int class_count) {
  std::vector<Detection> out;
  for_each_line(text, [&](const std::string& line, int line_no) {
    const auto f = split_fields(line);
    if (f.size() != 6) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 6 fields"
                       " (class cx cy w h conf), got " +
                       std::to_string(f.size()) +
                       (f.size() == 5 ? " (missing 'conf')" : ""));
    }
    const auto ann = parse_ann_fields(f, line_no, class_count);
    const double conf = parse_field(f[5], line_no, "conf");
    if (conf < 0.0 || conf > 1.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": conf outside [0,1]");
    }
    out.push_back({ann.class_id, denormalize(ann, img_w, img_h), conf});
  });
  return out;
}

std::string serialize_labels(const std::vector<GroundTruth>& gts, double img_w,
                             double img_h) {
  std::string out;
  for (const auto& gt : gts) {
    const auto ann = normalize(gt.class_id, gt.box, img_w, img_h);
    out += std::to_string(ann.class_id) + " " + fmt_num(ann.cx) + " " +
           fmt_num(ann.cy) + " " + fmt_num(ann.w) + " " + fmt_num(ann.h) + "\n";
  }
  return out;
}

std::string serialize_predictions(const std::vector<Detection>& dets,
                                  double img_w, double img_h) {
  std::string out;
  for (const auto& d : dets) {
    const auto ann = normalize(d.class_id, d.box, img_w, img_h);
    out += std::to_string(ann.class_id) + " " + fmt_num(ann.cx) + " " +
           fmt_num(ann.cy) + " " + fmt_num(ann.w) + " " + fmt_num(ann.h) + " " +
           fmt_num(d.confidence) + "\n";
  }
  return out;
}

std::vector<Detection> decode_grid(const GridPrediction& g, double img_w,
                                   double img_h, double conf_thresh) {
  g.validate();
  std::vector<Detection> out;
  const int stride = g.stride();
  for (std::size_t base = 0; base < g.values.size(); base += stride) {
    const double* v = g.values.data() + base;
    const double obj = v[4];
    if (obj < 0.0 || obj > 1.0) {
      throw ValidationError("objectness outside [0,1]");
    }
    ClassId best_cls = 0;
    double best_p = v[5];
    for (int c = 1; c < g.class_count; ++c) {
      if (v[5 + c] > best_p) {
        best_p = v[5 + c];
        best_cls = c;
      }
    }
    if (best_p < 0.0 || best_p > 1.0) {
      throw ValidationError("class probability outside [0,1]");
    }
    const double conf = obj * best_p;
    if (conf < conf_thresh) continue;
    if (v[2] <= 0.0 || v[3] <= 0.0) continue;  // degenerate slot
    NormalizedAnnotation ann{best_cls, v[0], v[1], v[2], v[3]};
    out.push_back({best_cls, denormalize(ann, img_w, img_h), conf});
  }
  return out;
}

GridPrediction parse_grid(const std::string& text) {
  std::istringstream ss(text);
  GridPrediction g;
  if (!(ss >> g.grid_size >> g.boxes_per_cell >> g.class_count)) {
    throw ParseError("grid file: malformed 'S B C' header");
  }
  if (g.grid_size <= 0 || g.boxes_per_cell <= 0 || g.class_count <= 0) {
    throw ValidationError("grid file: header dimensions must be positive");
  }
  double v;
  while (ss >> v) g.values.push_back(v);
  if (!ss.eof()) {
    throw ParseError("grid file: non-numeric token in value block");
  }
  g.validate();
  return g;
}

std::string serialize_grid(const GridPrediction& g) {
  g.validate();
  std::string out = std::to_string(g.grid_size) + " " +
                    std::to_string(g.boxes_per_cell) + " " +
                    std::to_string(g.class_count) + "\n";
  const int stride = g.stride();
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    out += fmt_num(g.values[i]);
    out += (i % stride == static_cast<std::size_t>(stride) - 1) ? '\n' : ' ';
  }
  return out;
}

DatasetManifest split_manifest(std::vector<ManifestImage> entries,
                               const SplitFractions& fractions,
                               std::uint64_t seed,
                               std::vector<std::string> classes) {
  const double f[3] = {fractions.train, fractions.val, fractions.test};
  for (double x : f) {
    if (x < 0.0) throw ConfigError("split fraction must be non-negative");
  }
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  // Fisher-Yates with splitmix64 so the assignment is seed-deterministic
  // across platforms.
  SplitMix64 rng(seed);
  for (std::size_t i = entries.size(); i > 1; --i) {
    std::swap(entries[i - 1], entries[rng.next_below(i)]);
  }
  const auto n = static_cast<double>(entries.size());
  const std::size_t b1 = static_cast<std::size_t>(std::llround(f[0] * n));
  const std::size_t b2 = static_cast<std::size_t>(std::llround((f[0] + f[1]) * n));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].split = i < b1 ? "train" : i < b2 ? "val" : "test";
  }
  return {std::move(classes), std::move(entries)};
}

std::string manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["classes"] = m.classes;
  j["images"] = nlohmann::json::array();
  for (const auto& img : m.images) {
    j["images"].push_back({{"id", img.id},
                           {"width", img.width},
                           {"height", img.height},
                           {"labels", img.labels},
                           {"split", img.split}});
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& e : j.at("images")) {
      ManifestImage img;
      img.id = e.at("id").get<std::string>();
      img.width = e.at("width").get<int>();
      img.height = e.at("height").get<int>();
      img.labels = e.at("labels").get<std::string>();
      img.split = e.value("split", "train");
      if (img.width <= 0 || img.height <= 0) {
        throw ValidationError("manifest: image '" + img.id +
                              "' has non-positive dimensions");
      }
      if (img.split != "train" && img.split != "val" && img.split != "test") {
        throw ValidationError("manifest: image '" + img.id +
                              "' has unknown split '" + img.split + "'");
      }
      m.images.push_back(std::move(img));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace palletmap
