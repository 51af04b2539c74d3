#include "palletmap/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "palletmap/error.hpp"
#include "palletmap/rng.hpp"

namespace palletmap {

void AugmentationSpec::validate() const {
  if (zoom_max < 1.0) throw ConfigError("zoom_max must be >= 1");
  if (blur_sigma_max < 0.0) throw ConfigError("blur_sigma_max must be >= 0");
  if (noise_fraction_max < 0.0 || noise_fraction_max > 1.0) {
    throw ConfigError("noise_fraction_max must lie in [0,1]");
  }
}

AugmentedImage flip(const Raster& img,
                    const std::vector<NormalizedAnnotation>& anns,
                    FlipAxis axis) {
  img.validate();
  Raster out{img.width, img.height, img.channels,
             std::vector<std::uint8_t>(img.samples.size())};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int sx = axis == FlipAxis::kHorizontal ? img.width - 1 - x : x;
      const int sy = axis == FlipAxis::kVertical ? img.height - 1 - y : y;
      for (int c = 0; c < img.channels; ++c) {
        out.samples[out.index(x, y, c)] = img.at(sx, sy, c);
      }
    }
  }
  std::vector<NormalizedAnnotation> flipped = anns;
  for (auto& a : flipped) {
    if (axis == FlipAxis::kHorizontal) {
      a.cx = 1.0 - a.cx;
    } else {
      a.cy = 1.0 - a.cy;
    }
  }
  return {std::move(out), std::move(flipped)};
}

AugmentedImage crop_zoom(const Raster& img,
                         const std::vector<NormalizedAnnotation>& anns,
                         double zoom, Point anchor) {
  img.validate();
  if (zoom < 1.0) throw ConfigError("zoom must be >= 1");
  if (anchor.x < 0.0 || anchor.x > 1.0 || anchor.y < 0.0 || anchor.y > 1.0) {
    throw ConfigError("anchor must lie in the unit square");
  }
  const double W = img.width, H = img.height;
  const double cw = W / zoom, ch = H / zoom;
  const double x0 = anchor.x * (W - cw);
  const double y0 = anchor.y * (H - ch);

  Raster out{img.width, img.height, img.channels,
             std::vector<std::uint8_t>(img.samples.size())};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Pixel-center mapping; zoom = 1 reduces to the identity.
      const double sx = x0 + (x + 0.5) * (cw / W) - 0.5;
      const double sy = y0 + (y + 0.5) * (ch / H) - 0.5;
      const int ix = static_cast<int>(std::floor(sx));
      const int iy = static_cast<int>(std::floor(sy));
      const double fx = sx - ix;
      const double fy = sy - iy;
      const int x1 = std::clamp(ix, 0, img.width - 1);
      const int x2 = std::clamp(ix + 1, 0, img.width - 1);
      const int y1 = std::clamp(iy, 0, img.height - 1);
      const int y2 = std::clamp(iy + 1, 0, img.height - 1);
      for (int c = 0; c < img.channels; ++c) {
        const double v = (1 - fx) * (1 - fy) * img.at(x1, y1, c) +
                         fx * (1 - fy) * img.at(x2, y1, c) +
                         (1 - fx) * fy * img.at(x1, y2, c) +
                         fx * fy * img.at(x2, y2, c);
        out.samples[out.index(x, y, c)] =
            static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
    }
  }

  std::vector<NormalizedAnnotation> kept;
  for (const auto& a : anns) {
    // Pixel-space corners, clipped to the crop window.
    const double bx1 = (a.cx - a.w / 2.0) * W;
    const double by1 = (a.cy - a.h / 2.0) * H;
    const double bx2 = (a.cx + a.w / 2.0) * W;
    const double by2 = (a.cy + a.h / 2.0) * H;
    const double cx1 = std::max(bx1, x0);
    const double cy1 = std::max(by1, y0);
    const double cx2 = std::min(bx2, x0 + cw);
    const double cy2 = std::min(by2, y0 + ch);
    if (cx2 <= cx1 || cy2 <= cy1) continue;
    const double visible = (cx2 - cx1) * (cy2 - cy1);
    const double original = (bx2 - bx1) * (by2 - by1);
    if (visible < kCropDropAreaRatio * original) continue;
    NormalizedAnnotation n;
    n.class_id = a.class_id;
    const double nx1 = (cx1 - x0) / cw;
    const double ny1 = (cy1 - y0) / ch;
    const double nx2 = (cx2 - x0) / cw;
    const double ny2 = (cy2 - y0) / ch;
    n.cx = (nx1 + nx2) / 2.0;
    n.cy = (ny1 + ny2) / 2.0;
    n.w = nx2 - nx1;
    n.h = ny2 - ny1;
    kept.push_back(n);
  }
  return {std::move(out), std::move(kept)};
}

Raster inject_noise(const Raster& img, double fraction, std::uint64_t seed) {
  img.validate();
  if (fraction < 0.0 || fraction > 1.0) {
    throw ConfigError("noise fraction must lie in [0,1]");
  }
  const std::size_t pixel_count =
      static_cast<std::size_t>(img.width) * img.height;
  const std::size_t k =
      static_cast<std::size_t>(std::floor(fraction * pixel_count));
  Raster out = img;
  if (k == 0) return out;

  // Partial Fisher-Yates over pixel indices gives k distinct positions.
  SplitMix64 rng(seed);
  std::vector<std::uint32_t> idx(pixel_count);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.next_below(pixel_count - i);
    std::swap(idx[i], idx[j]);
    const std::uint8_t value = (rng.next_u64() & 1) ? 255 : 0;
    const std::size_t base = static_cast<std::size_t>(idx[i]) * img.channels;
    for (int c = 0; c < img.channels; ++c) out.samples[base + c] = value;
  }
  return out;
}

AugmentedImage augment(const Raster& img,
                       const std::vector<NormalizedAnnotation>& anns,
                       const AugmentationSpec& spec, std::uint64_t stream) {
  spec.validate();
  SplitMix64 rng = SplitMix64::derive(spec.seed, stream);
  AugmentedImage cur{img, anns};
  if (spec.hflip && (rng.next_u64() & 1)) {
    cur = flip(cur.image, cur.annotations, FlipAxis::kHorizontal);
  }
  if (spec.vflip && (rng.next_u64() & 1)) {
    cur = flip(cur.image, cur.annotations, FlipAxis::kVertical);
  }
  if (spec.zoom_max > 1.0) {
    const double zoom = rng.uniform(1.0, spec.zoom_max);
    const Point anchor{rng.next_double(), rng.next_double()};
    cur = crop_zoom(cur.image, cur.annotations, zoom, anchor);
  }
  if (spec.blur_sigma_max > 0.0) {
    const double sigma = rng.uniform(0.0, spec.blur_sigma_max);
    if (sigma > 0.0) cur.image = gaussian_blur(cur.image, sigma);
  }
  if (spec.noise_fraction_max > 0.0) {
    const double fraction = rng.uniform(0.0, spec.noise_fraction_max);
    cur.image = inject_noise(cur.image, fraction, rng.next_u64());
  }
  return cur;
}

}  // namespace palletmap
