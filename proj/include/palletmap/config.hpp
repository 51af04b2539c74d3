#pragma once

#include <string>

#include "palletmap/losses.hpp"

namespace palletmap {

// Tuned-weight config as emitted by a study: loss weights plus lr0,
// which is pass-through for external training loops.
struct TunedWeights {
  double lambda_cls = 0.0;
  double lambda_box = 0.0;
  double lambda_iou = 0.0;
  double lr0 = 0.0;

  LossWeights to_loss_weights() const {
    LossWeights w;
    w.cls = lambda_cls;
    w.box = lambda_box;
    w.iou = lambda_iou;
    return w;
  }
};

std::string tuned_weights_to_json(const TunedWeights& w);
TunedWeights tuned_weights_from_json(const std::string& text);

std::string loss_weights_to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const std::string& text);

}  // namespace palletmap
