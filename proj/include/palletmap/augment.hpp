#pragma once

#include <cstdint>
#include <vector>

#include "palletmap/annotation.hpp"
#include "palletmap/raster.hpp"

namespace palletmap {

enum class FlipAxis { kHorizontal, kVertical };

struct AugmentationSpec {
  bool hflip = false;
  bool vflip = false;
  double zoom_max = 1.19;
  double blur_sigma_max = 1.1;
  double noise_fraction_max = 0.0049;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AugmentedImage {
  Raster image;
  std::vector<NormalizedAnnotation> annotations;
};

AugmentedImage flip(const Raster& img,
                    const std::vector<NormalizedAnnotation>& anns,
                    FlipAxis axis);

// Crop a (W/zoom, H/zoom) window positioned by anchor, resample back to
// (W, H) with bilinear interpolation. Boxes clipped to the window; boxes
// keeping less than 10% of their original area are dropped.
AugmentedImage crop_zoom(const Raster& img,
                         const std::vector<NormalizedAnnotation>& anns,
                         double zoom, Point anchor);

inline constexpr double kCropDropAreaRatio = 0.10;

// Sets floor(fraction * W * H) distinct pixels to 0 or 255 (all channels),
// chosen by a seeded RNG stream.
Raster inject_noise(const Raster& img, double fraction, std::uint64_t seed);

// Full per-image pipeline driven by a spec; the RNG stream is derived
// from (spec.seed, stream) so parallel order cannot change outputs.
AugmentedImage augment(const Raster& img,
                       const std::vector<NormalizedAnnotation>& anns,
                       const AugmentationSpec& spec, std::uint64_t stream);

}  // namespace palletmap
