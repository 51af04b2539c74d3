#include "palletmap/config.hpp"

#include <nlohmann/json.hpp>

#include "palletmap/error.hpp"

namespace palletmap {

namespace {

double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParseError(std::string("config: missing numeric field '") + key +
                     "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

std::string tuned_weights_to_json(const TunedWeights& w) {
  nlohmann::json j{{"lambda_cls", w.lambda_cls},
                   {"lambda_box", w.lambda_box},
                   {"lambda_iou", w.lambda_iou},
                   {"lr0", w.lr0}};
  return j.dump(2) + "\n";
}

TunedWeights tuned_weights_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  TunedWeights w;
  w.lambda_cls = require_number(j, "lambda_cls");
  w.lambda_box = require_number(j, "lambda_box");
  w.lambda_iou = require_number(j, "lambda_iou");
  w.lr0 = require_number(j, "lr0");
  return w;
}

std::string loss_weights_to_json(const LossWeights& w) {
  nlohmann::json j{{"box", w.box},
                   {"obj", w.obj},
                   {"cls", w.cls},
                   {"dfl", w.dfl},
                   {"iou", w.iou}};
  return j.dump(2) + "\n";
}

LossWeights loss_weights_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  LossWeights w;
  w.box = require_number(j, "box");
  w.obj = require_number(j, "obj");
  w.cls = require_number(j, "cls");
  w.dfl = require_number(j, "dfl");
  w.iou = require_number(j, "iou");
  for (double v : {w.box, w.obj, w.cls, w.dfl, w.iou}) {
    if (v < 0.0) throw ValidationError("loss weights must be non-negative");
  }
  return w;
}

}  // namespace palletmap
