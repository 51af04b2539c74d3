#include "palletmap/gradcheck.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "palletmap/rng.hpp"

namespace palletmap {

namespace {

double rel_err(double analytic, double fd) {
  const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-3});
  return std::abs(analytic - fd) / denom;
}

// Box pairs with every coordinate pair separated by a margin well above
// the FD step, so no min/max branch flips inside the stencil.
std::pair<BoundingBox, BoundingBox> sample_box_pair(SplitMix64& rng) {
  for (;;) {
    const double gx1 = rng.uniform(0.0, 50.0);
    const double gy1 = rng.uniform(0.0, 50.0);
    const double gw = rng.uniform(5.0, 30.0);
    const double gh = rng.uniform(5.0, 30.0);
    const double px1 = gx1 + rng.uniform(-8.0, 8.0);
    const double py1 = gy1 + rng.uniform(-8.0, 8.0);
    const double pw = gw + rng.uniform(-4.0, 4.0);
    const double ph = gh + rng.uniform(-4.0, 4.0);
    if (pw < 1.0 || ph < 1.0) continue;
    const double gx2 = gx1 + gw, gy2 = gy1 + gh;
    const double px2 = px1 + pw, py2 = py1 + ph;
    const double margin = 1e-2;
    if (std::abs(px1 - gx1) < margin || std::abs(py1 - gy1) < margin ||
        std::abs(px2 - gx2) < margin || std::abs(py2 - gy2) < margin) {
      continue;
    }
    const double iw = std::min(px2, gx2) - std::max(px1, gx1);
    const double ih = std::min(py2, gy2) - std::max(py1, gy1);
    if (std::abs(iw) < margin || std::abs(ih) < margin) continue;
    return {BoundingBox(px1, py1, px2, py2), BoundingBox(gx1, gy1, gx2, gy2)};
  }
}

double check_ciou(int samples, std::uint64_t seed, double h) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto [pred, gt] = sample_box_pair(rng);
    const auto grad = ciou_grad(pred, gt);
    // The gradient convention freezes alpha, so the FD stencil must
    // differentiate the same frozen-alpha objective.
    const double alpha0 = ciou_loss(pred, gt).alpha;
    const auto frozen = [&](const BoundingBox& b) {
      const CiouTerms t = ciou_loss(b, gt);
      return 1.0 - t.iou + t.center_dist_sq / t.enclosing_diag_sq +
             alpha0 * t.aspect_term;
    };
    double coords[4] = {pred.x1(), pred.y1(), pred.x2(), pred.y2()};
    for (int i = 0; i < 4; ++i) {
      double c[4] = {coords[0], coords[1], coords[2], coords[3]};
      c[i] = coords[i] + h;
      const double up = frozen(BoundingBox(c[0], c[1], c[2], c[3]));
      c[i] = coords[i] - h;
      const double down = frozen(BoundingBox(c[0], c[1], c[2], c[3]));
      worst = std::max(worst, rel_err(grad[i], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

double check_bce(int samples, std::uint64_t seed, double h) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double y = (rng.next_u64() & 1) ? 1.0 : 0.0;
    const double p = rng.uniform(0.01, 0.99);
    const double fd = (bce_loss(y, p + h) - bce_loss(y, p - h)) / (2.0 * h);
    worst = std::max(worst, rel_err(bce_grad(y, p), fd));
  }
  return worst;
}

double check_ce(int samples, std::uint64_t seed, double h) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int n = 2 + static_cast<int>(rng.next_below(4));
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) {
      v = rng.uniform(0.05, 1.0);
      sum += v;
    }
    for (double& v : p) v /= sum;
    std::vector<double> y(n, 0.0);
    y[rng.next_below(n)] = 1.0;
    const auto grad = ce_grad(y, p);
    // Tangent directions keep the perturbed vector on the simplex.
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      auto up = p, down = p;
      up[i] += h;
      up[j] -= h;
      down[i] -= h;
      down[j] += h;
      const double fd = (ce_loss(y, up) - ce_loss(y, down)) / (2.0 * h);
      worst = std::max(worst, rel_err(grad[i] - grad[j], fd));
    }
  }
  return worst;
}

double check_dfl(int samples, std::uint64_t seed, double h) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    DflBins bins;
    bins.reg_max = 4 + static_cast<int>(rng.next_below(13));
    bins.probs.resize(bins.reg_max + 1);
    double sum = 0.0;
    for (double& v : bins.probs) {
      v = rng.uniform(0.05, 1.0);
      sum += v;
    }
    for (double& v : bins.probs) v /= sum;
    // Keep the target's fractional part away from the bin edges so the
    // floor() branch is stable under the FD stencil.
    const double target =
        rng.next_below(bins.reg_max) + rng.uniform(0.05, 0.95);
    const auto grad = dfl_grad(target, bins);
    const int l = static_cast<int>(std::floor(target));
    const int r = l + 1;
    auto up = bins, down = bins;
    up.probs[l] += h;
    up.probs[r] -= h;
    down.probs[l] -= h;
    down.probs[r] += h;
    const double fd =
        (dfl_loss(target, up) - dfl_loss(target, down)) / (2.0 * h);
    worst = std::max(worst, rel_err(grad[l] - grad[r], fd));
  }
  return worst;
}

}  // namespace

std::vector<GradCheckReport> run_gradient_checks(int samples_per_loss,
                                                 std::uint64_t seed, double h,
                                                 double tol) {
  std::vector<GradCheckReport> out;
  const struct {
    const char* name;
    double (*fn)(int, std::uint64_t, double);
  } checks[] = {
      {"ciou", check_ciou},
      {"bce", check_bce},
      {"ce", check_ce},
      {"dfl", check_dfl},
  };
  for (const auto& c : checks) {
    GradCheckReport r;
    r.loss = c.name;
    r.samples = samples_per_loss;
    r.max_rel_err = c.fn(samples_per_loss, seed, h);
    r.pass = r.max_rel_err < tol;
    out.push_back(r);
  }
  return out;
}

std::string grad_check_to_json(const std::vector<GradCheckReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    j.push_back({{"loss", r.loss},
                 {"samples", r.samples},
                 {"max_rel_err", r.max_rel_err},
                 {"pass", r.pass}});
  }
  return j.dump(2) + "\n";
}

}  // namespace palletmap
