#include "palletmap/objectives.hpp"

#include <cmath>
#include <memory>

#include "palletmap/association.hpp"
#include "palletmap/error.hpp"
#include "palletmap/evaluation.hpp"

namespace palletmap {

namespace {

struct Scene {
  std::vector<Detection> holes;
  std::vector<Detection> pallets;
  std::vector<std::size_t> true_parent;  // per hole
  ImageSample sample;
};

// Deterministic synthetic warehouse scenes: pallets with holes inside,
// jittered true detections plus low-confidence clutter.
std::vector<Scene> build_fixture() {
  std::vector<Scene> scenes;
  SplitMix64 rng(20250823);
  for (int s = 0; s < 15; ++s) {
    Scene scene;
    const int n_pallets = 1 + static_cast<int>(rng.next_below(2));
    for (int p = 0; p < n_pallets; ++p) {
      const double x1 = 40.0 + 300.0 * p + rng.uniform(0.0, 20.0);
      const double y1 = 150.0 + rng.uniform(0.0, 40.0);
      const double w = rng.uniform(200.0, 260.0);
      const double h = rng.uniform(90.0, 120.0);
      const BoundingBox pallet(x1, y1, x1 + w, y1 + h);
      scene.sample.gts.push_back({kClassPallet, pallet});
      scene.pallets.push_back(
          {kClassPallet, pallet, rng.uniform(0.6, 0.95)});
      scene.sample.preds.push_back(scene.pallets.back());
      const int n_holes = 2 + static_cast<int>(rng.next_below(2));
      for (int k = 0; k < n_holes; ++k) {
        const double hw = w / (n_holes * 2.0);
        const double hx = x1 + (2 * k + 0.5) * hw + rng.uniform(0.0, 5.0);
        const double hy = y1 + h * 0.45;
        const BoundingBox gt_hole(hx, hy, hx + hw, hy + h * 0.4);
        scene.sample.gts.push_back({kClassPalletHole, gt_hole});
        const double jitter = rng.uniform(-2.0, 2.0);
        const BoundingBox det_hole(gt_hole.x1() + jitter, gt_hole.y1(),
                                   gt_hole.x2() + jitter, gt_hole.y2());
        scene.holes.push_back(
            {kClassPalletHole, det_hole, rng.uniform(0.55, 0.95)});
        scene.sample.preds.push_back(scene.holes.back());
        scene.true_parent.push_back(scene.pallets.size() - 1);
      }
    }
    // Clutter: spurious low-confidence hole detections off the pallets.
    const int n_clutter = static_cast<int>(rng.next_below(3));
    for (int c = 0; c < n_clutter; ++c) {
      const double x = rng.uniform(0.0, 600.0);
      const double y = rng.uniform(0.0, 80.0);
      const BoundingBox fake(x, y, x + 30.0, y + 25.0);
      scene.sample.preds.push_back(
          {kClassPalletHole, fake, rng.uniform(0.05, 0.45)});
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

double assoc_eval_value(const std::vector<Scene>& scenes, double tau,
                        double conf) {
  std::vector<ImageSample> filtered;
  for (const auto& scene : scenes) {
    ImageSample s;
    s.gts = scene.sample.gts;
    for (const auto& d : scene.sample.preds) {
      if (d.confidence >= conf) s.preds.push_back(d);
    }
    filtered.push_back(std::move(s));
  }
  double f1_sum = 0.0;
  for (ClassId c = 0; c < kDefaultClassCount; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& s : filtered) {
      std::vector<Detection> preds;
      std::vector<GroundTruth> gts;
      for (const auto& d : s.preds)
        if (d.class_id == c) preds.push_back(d);
      for (const auto& g : s.gts)
        if (g.class_id == c) gts.push_back(g);
      const MatchResult mr = match(preds, gts, 0.5, true);
      for (const auto& pr : mr.pairs) (pr.gt_index ? tp : fp) += 1;
      fn += mr.unmatched_gts.size();
    }
    const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    f1_sum += f1_score(p, r);
  }

  std::size_t correct = 0, total = 0;
  for (const auto& scene : scenes) {
    const AssociationMap map = associate_iou(scene.holes, scene.pallets, tau);
    for (const auto& link : map.links) {
      ++total;
      if (link.pallet_index &&
          *link.pallet_index == scene.true_parent[link.hole_index]) {
        ++correct;
      }
    }
  }
  const double assoc_score = total > 0 ? double(correct) / double(total) : 0.0;
  return 0.5 * (f1_sum / kDefaultClassCount) + 0.5 * assoc_score;
}

}  // namespace

NamedObjective make_objective(const std::string& name) {
  if (name == "quadratic") {
    NamedObjective obj;
    obj.default_space.params = {{"x", 0.0, 1.0, ParamScale::kLinear}};
    obj.fn = [](const ParamAssignment& params, TrialReporter& reporter) {
      const double x = params.at("x");
      const double value = -(x - 0.3) * (x - 0.3);
      for (int step = 1; step <= 8; ++step) {
        const double partial = value - 0.1 * (8 - step) / 8.0;
        if (reporter.report(step, partial)) return value;
      }
      return value;
    };
    return obj;
  }
  if (name == "assoc_eval") {
    NamedObjective obj;
    obj.default_space.params = {{"tau", 0.0, 1.0, ParamScale::kLinear},
                                {"conf", 0.0, 1.0, ParamScale::kLinear}};
    auto scenes = std::make_shared<std::vector<Scene>>(build_fixture());
    obj.fn = [scenes](const ParamAssignment& params, TrialReporter& reporter) {
      const double tau = params.at("tau");
      const double conf = params.at("conf");
      const double value = assoc_eval_value(*scenes, tau, conf);
      // Evaluate on growing scene prefixes as intermediate signal.
      for (int step = 1; step <= 6; ++step) {
        const std::vector<Scene> prefix(scenes->begin(),
                                        scenes->begin() + step * 2);
        if (reporter.report(step, assoc_eval_value(prefix, tau, conf))) {
          return value;
        }
      }
      return value;
    };
    return obj;
  }
  throw ConfigError("unknown objective '" + name +
                    "' (expected 'quadratic' or 'assoc_eval')");
}

}  // namespace palletmap
