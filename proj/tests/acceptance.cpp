// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli_helpers.hpp"
#include "oracles.hpp"
#include "palletmap/association.hpp"
#include "palletmap/augment.hpp"
#include "palletmap/config.hpp"
#include "palletmap/evaluation.hpp"
#include "palletmap/gradcheck.hpp"
#include "palletmap/losses.hpp"
#include "palletmap/tuner.hpp"

using namespace palletmap;

namespace {

int failures = 0;

void run_criterion(const std::string& name, const std::function<bool()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string why;
  try {
    ok = fn();
  } catch (const std::exception& e) {
    why = std::string(" (") + e.what() + ")";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("[%s] %s (%.2fs)%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs,
              why.c_str());
  if (!ok) ++failures;
}

bool iou_oracle_equivalence() {
  SplitMix64 rng(1001);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const double ax = rng.uniform(0.0, 100.0), ay = rng.uniform(0.0, 100.0);
    const double bx = rng.uniform(0.0, 100.0), by = rng.uniform(0.0, 100.0);
    const BoundingBox a(ax, ay, ax + rng.uniform(8.0, 30.0),
                        ay + rng.uniform(8.0, 30.0));
    const BoundingBox b(bx, by, bx + rng.uniform(8.0, 30.0),
                        by + rng.uniform(8.0, 30.0));
    const double v = iou(a, b);
    if (std::abs(v - oracles::iou_rational(a, b)) > 1e-12) return false;
    if (std::abs(v - oracles::iou_raster(a, b)) > 2e-2) return false;
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
             .count() < 5.0;
}

bool ciou_worked_examples() {
  if (ciou_loss(BoundingBox(3, 4, 10, 20), BoundingBox(3, 4, 10, 20)).loss !=
      0.0) {
    return false;
  }
  const auto t = ciou_loss(BoundingBox(0, 0, 2, 2), BoundingBox(1, 0, 3, 2));
  if (std::abs(t.loss - (2.0 / 3.0 + 1.0 / 13.0)) > 1e-9) return false;

  const double pi = 3.141592653589793238462643383279502884;
  const auto c =
      ciou_loss(BoundingBox(-1, -2, 1, 2), BoundingBox(-2, -1, 2, 1));
  const double exp_iou = 4.0 / 12.0;
  const double exp_v =
      (4.0 / (pi * pi)) * std::pow(std::atan(2.0) - std::atan(0.5), 2);
  const double exp_alpha = exp_v / ((1.0 - exp_iou) + exp_v);
  return std::abs(c.loss - (1.0 - exp_iou + exp_alpha * exp_v)) <= 1e-9;
}

bool gradient_suite() {
  const auto start = std::chrono::steady_clock::now();
  const auto reports = run_gradient_checks(500, 1234);
  if (reports.size() != 4) return false;
  for (const auto& r : reports) {
    if (!r.pass || r.max_rel_err >= 1e-4) return false;
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
             .count() < 30.0;
}

bool association_oracle() {
  SplitMix64 rng(1002);
  for (int scene = 0; scene < 200; ++scene) {
    std::vector<Detection> holes, pallets;
    const auto nh = rng.next_below(21), np = rng.next_below(21);
    for (std::size_t i = 0; i < nh; ++i) {
      holes.push_back({1, oracles::random_box(rng), rng.next_double()});
    }
    for (std::size_t i = 0; i < np; ++i) {
      pallets.push_back({0, oracles::random_box(rng), rng.next_double()});
    }
    const double tau = rng.uniform(0.0, 0.4);
    const auto got = associate_iou(holes, pallets, tau);
    const auto want = oracles::associate_iou_bruteforce(holes, pallets, tau);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (got.links[i].pallet_index != want[i]) return false;
    }
  }
  // centroid tie-break chain on nested pallets: IoU, then center distance,
  // then lowest index
  const std::vector<Detection> nested = {
      {0, BoundingBox(0, 0, 100, 100), 0.9},
      {0, BoundingBox(0, 0, 50, 50), 0.9}};
  const std::vector<Detection> hole = {{1, BoundingBox(10, 10, 20, 20), 0.9}};
  if (associate_centroid(hole, nested).links[0].pallet_index != 1) return false;
  const std::vector<Detection> shifted = {
      {0, BoundingBox(0, 0, 80, 80), 0.9},
      {0, BoundingBox(10, 10, 90, 90), 0.9}};
  const std::vector<Detection> centered = {{1, BoundingBox(44, 44, 56, 56), 0.9}};
  if (associate_centroid(centered, shifted).links[0].pallet_index != 1) {
    return false;
  }
  const std::vector<Detection> twins = {
      {0, BoundingBox(0, 0, 100, 100), 0.9},
      {0, BoundingBox(0, 0, 100, 100), 0.9}};
  const std::vector<Detection> mid = {{1, BoundingBox(40, 40, 60, 60), 0.9}};
  return associate_centroid(mid, twins).links[0].pallet_index == 0;
}

bool evaluation_oracle() {
  if (std::abs(f1_score(0.814, 0.812) - 0.8130) > 5e-4) return false;

  SplitMix64 rng(1003);
  for (int trial = 0; trial < 100; ++trial) {
    // small random fixtures
    std::vector<ImageSample> images(3);
    std::size_t total_preds = 0;
    for (auto& img : images) {
      const auto n = rng.next_below(3);
      for (std::size_t g = 0; g < n; ++g) {
        const ClassId cls = static_cast<ClassId>(rng.next_below(2));
        const auto box = oracles::random_box(rng);
        img.gts.push_back({cls, box});
        if (rng.next_double() < 0.7) {
          const double dx = rng.uniform(-3.0, 3.0);
          img.preds.push_back(
              {cls,
               BoundingBox(box.x1() + dx, box.y1(), box.x2() + dx, box.y2()),
               rng.next_double()});
          ++total_preds;
        }
      }
    }

    // confusion conservation: total = matched + unmatched preds + unmatched GTs
    const double conf_thresh = rng.uniform(0.0, 0.8);
    const auto cm = confusion(images, 0.5, conf_thresh);
    long long retained = 0, gts_total = 0, matched = 0;
    for (const auto& img : images) {
      for (const auto& p : img.preds) retained += p.confidence >= conf_thresh;
      gts_total += static_cast<long long>(img.gts.size());
    }
    for (int r = 0; r < cm.class_count(); ++r) {
      for (int c = 0; c < cm.class_count(); ++c) matched += cm.at(r, c);
    }
    if (cm.total() != retained + gts_total - matched) return false;

    if (total_preds > 10) continue;
    // AP vs exhaustive enumeration
    for (ClassId cls = 0; cls < 2; ++cls) {
      std::vector<std::pair<double, bool>> points;
      std::size_t gt_count = 0;
      for (const auto& img : images) {
        std::vector<Detection> preds;
        std::vector<GroundTruth> gts;
        for (const auto& p : img.preds)
          if (p.class_id == cls) preds.push_back(p);
        for (const auto& g : img.gts)
          if (g.class_id == cls) gts.push_back(g);
        gt_count += gts.size();
        const auto mr = match(preds, gts, 0.5, true);
        for (const auto& pr : mr.pairs) {
          points.push_back(
              {preds[pr.prediction_index].confidence, pr.gt_index.has_value()});
        }
      }
      std::sort(points.begin(), points.end(),
                [](const auto& a, const auto& b) { return a.first > b.first; });
      const auto ap = average_precision(images, 0.5, cls);
      if (gt_count == 0) {
        if (ap) return false;
        continue;
      }
      if (!ap) return false;
      if (std::abs(*ap - oracles::ap_enumeration(points, gt_count)) > 1e-12) {
        return false;
      }
    }
  }
  return true;
}

bool augmentation_determinism() {
  SplitMix64 rng(1004);
  Raster img{64, 48, 3, {}};
  img.samples.resize(64 * 48 * 3);
  for (auto& s : img.samples) s = static_cast<std::uint8_t>(rng.next_below(256));
  const std::vector<NormalizedAnnotation> anns = {{0, 0.5, 0.5, 0.5, 0.5}};

  for (auto axis : {FlipAxis::kHorizontal, FlipAxis::kVertical}) {
    const auto once = flip(img, anns, axis);
    if (flip(once.image, once.annotations, axis).image.samples != img.samples) {
      return false;
    }
  }

  const Raster flat{100, 80, 1, std::vector<std::uint8_t>(8000, 128)};
  for (double f : {0.0049, 0.05, 0.5}) {
    const auto noisy = inject_noise(flat, f, 7);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < flat.samples.size(); ++i) {
      changed += noisy.samples[i] != 128;
    }
    const auto expected =
        static_cast<std::size_t>(std::floor(f * 8000.0));
    if (changed != expected) return false;
  }

  AugmentationSpec spec;
  spec.hflip = true;
  spec.vflip = true;
  spec.seed = 99;
  const auto a = augment(img, anns, spec, 5);
  const auto b = augment(img, anns, spec, 5);
  if (a.image.samples != b.image.samples) return false;

  const Raster grey{31, 17, 1, std::vector<std::uint8_t>(527, 77)};
  for (double sigma : {0.5, 1.1, 2.0}) {
    const auto blurred = gaussian_blur(grey, sigma);
    for (auto s : blurred.samples) {
      if (s != 77) return false;
    }
  }
  return true;
}

bool tuner_convergence() {
  const auto start = std::chrono::steady_clock::now();
  ParamSpace space;
  space.params = {{"x", 0.0, 1.0, ParamScale::kLinear}};
  std::vector<double> gaps;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    StudyConfig cfg;
    cfg.n_trials = 20;
    cfg.seed = seed;
    const auto result =
        run_study(space, cfg, [](const ParamAssignment& p, TrialReporter&) {
          const double x = p.at("x");
          return -(x - 0.3) * (x - 0.3);
        });
    gaps.push_back(std::abs(result.best.params.at("x") - 0.3));
  }
  std::sort(gaps.begin(), gaps.end());
  const double median_gap = (gaps[4] + gaps[5]) / 2.0;
  if (median_gap >= 0.1) return false;
  if (std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count() >= 10.0) {
    return false;
  }

  // warmup: never prune before step 5, even hopeless trials
  StudyConfig cfg;
  TrialRecord trial;
  trial.id = 50;
  std::vector<TrialRecord> peers(3);
  for (int i = 0; i < 3; ++i) peers[i].id = i;
  for (int step = 1; step < cfg.pruner_warmup_steps; ++step) {
    trial.intermediates.push_back({step, -100.0});
    for (auto& p : peers) p.intermediates.push_back({step, 100.0});
    if (should_prune(trial, peers, step, cfg)) return false;
  }
  trial.intermediates.push_back({cfg.pruner_warmup_steps, -100.0});
  for (auto& p : peers) {
    p.intermediates.push_back({cfg.pruner_warmup_steps, 100.0});
  }
  return should_prune(trial, peers, cfg.pruner_warmup_steps, cfg);
}

bool round_trip_identity() {
  SplitMix64 rng(1005);
  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
  for (int i = 0; i < 100; ++i) {
    const double cx = rng.uniform(0.2, 0.8), cy = rng.uniform(0.2, 0.8);
    const double w = rng.uniform(0.05, 0.3), h = rng.uniform(0.05, 0.3);
    const auto box = denormalize({0, cx, cy, w, h}, 640, 480);
    gts.push_back({static_cast<ClassId>(i % 2), box});
    dets.push_back({static_cast<ClassId>(i % 2), box, rng.next_double()});
  }
  const auto gts2 = parse_labels(serialize_labels(gts, 640, 480), 640, 480);
  const auto dets2 =
      parse_predictions(serialize_predictions(dets, 640, 480), 640, 480);
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (std::abs(gts2[i].box.x1() - gts[i].box.x1()) > 1e-9 ||
        std::abs(gts2[i].box.y2() - gts[i].box.y2()) > 1e-9 ||
        std::abs(dets2[i].box.x2() - dets[i].box.x2()) > 1e-9 ||
        std::abs(dets2[i].confidence - dets[i].confidence) > 1e-9) {
      return false;
    }
  }

  const std::string fixture = R"({"lambda_cls": 0.1870, "lambda_box": 0.1167,
                                  "lambda_iou": 0.2690, "lr0": 0.0159})";
  const TunedWeights w = tuned_weights_from_json(fixture);
  if (w.lambda_cls != 0.1870 || w.lambda_box != 0.1167 ||
      w.lambda_iou != 0.2690 || w.lr0 != 0.0159) {
    return false;
  }
  const TunedWeights w2 = tuned_weights_from_json(tuned_weights_to_json(w));
  return w2.lambda_cls == w.lambda_cls && w2.lambda_box == w.lambda_box &&
         w2.lambda_iou == w.lambda_iou && w2.lr0 == w.lr0;
}

bool end_to_end_pipeline() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "palletmap_acceptance";
  fs::create_directories(dir);
  const auto run_variant = [&](const std::string& preds, const std::string& tag,
                               int run) {
    const std::string a = (dir / ("assoc_" + tag + std::to_string(run))).string();
    const std::string e = (dir / ("eval_" + tag + std::to_string(run))).string();
    const auto r = cli::run("pipeline --manifest \"" +
                            cli::fixture("warehouse/manifest.json") +
                            "\" --predictions \"" + cli::fixture(preds) +
                            "\" --out-assoc \"" + a + "\" --out-eval \"" + e +
                            "\"");
    return std::make_tuple(r.exit_code, read_file(a), read_file(e));
  };

  const auto [rc1, assoc1, eval1] = run_variant("warehouse/preds_clean", "c", 1);
  const auto [rc2, assoc2, eval2] = run_variant("warehouse/preds_clean", "c", 2);
  if (rc1 != 0 || rc2 != 0) return false;
  if (assoc1 != assoc2 || eval1 != eval2) return false;

  const auto eval = nlohmann::json::parse(eval1);
  if (eval["map50"].get<double>() != 1.0) return false;
  for (const auto& img : nlohmann::json::parse(assoc1)) {
    for (const auto& link : img["links"]) {
      if (link["pallet"].is_null()) return false;
    }
  }

  const auto [rc3, assoc3, eval3] =
      run_variant("warehouse/preds_perturbed", "p", 1);
  if (rc3 != 0) return false;
  int unassigned = 0;
  for (const auto& img : nlohmann::json::parse(assoc3)) {
    for (const auto& link : img["links"]) {
      if (link["pallet"].is_null()) ++unassigned;
    }
  }
  return unassigned == 1;
}

}  // namespace

int main() {
  run_criterion("iou oracle equivalence (rational + raster, 1000 pairs)",
                iou_oracle_equivalence);
  run_criterion("ciou worked examples to 1e-9", ciou_worked_examples);
  run_criterion("gradient suite vs central differences (500 samples each)",
                gradient_suite);
  run_criterion("association brute-force oracle + centroid tie-breaks",
                association_oracle);
  run_criterion("evaluation oracle (AP enumeration, F1 0.8130, conservation)",
                evaluation_oracle);
  run_criterion("augmentation determinism", augmentation_determinism);
  run_criterion("tuner convergence + pruner warmup", tuner_convergence);
  run_criterion("round-trip identity + tuned weight fixture",
                round_trip_identity);
  run_criterion("end-to-end pipeline on warehouse fixture",
                end_to_end_pipeline);

  if (failures > 0) {
    std::printf("%d criteria FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
