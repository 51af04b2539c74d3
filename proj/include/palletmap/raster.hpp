#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace palletmap {

// Row-major 8-bit raster, 1 (grey) or 3 (RGB) channels.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t at(int x, int y, int c = 0) const { return samples[index(x, y, c)]; }
  void validate() const;
};

// Binary PPM (P6) / PGM (P5), maxval 255.
Raster read_pnm(const std::string& path);
Raster parse_pnm(const std::string& bytes);
std::string serialize_pnm(const Raster& img);
void write_pnm(const std::string& path, const Raster& img);

// Separable Gaussian convolution, kernel radius ceil(3*sigma), weights
// normalized to sum 1, clamp-to-edge boundary. The serial version is the
// reference the parallel one is checked against.
Raster gaussian_blur_serial(const Raster& img, double sigma);
Raster gaussian_blur(const Raster& img, double sigma);

}  // namespace palletmap
