#include "palletmap/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "palletmap/error.hpp"

namespace palletmap {

namespace {

// Header tokens may be separated by whitespace and '#' comments.
int next_header_int(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size() &&
         std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    ++pos;
  }
  if (pos == start) throw ParseError("pnm: expected integer in header");
  return std::stoi(bytes.substr(start, pos - start));
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& w : k) w /= sum;
  return k;
}

// Horizontal then vertical pass over one channel plane held in doubles.
void convolve_row(const double* src, double* dst, int n, int stride,
                  const std::vector<double>& kernel) {
  const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int t = -radius; t <= radius; ++t) {
      const int j = std::clamp(i + t, 0, n - 1);
      acc += kernel[t + radius] * src[j * stride];
    }
    dst[i * stride] = acc;
  }
}

template <bool Parallel>
Raster blur_impl(const Raster& img, double sigma) {
  img.validate();
  if (!(sigma > 0.0)) throw ConfigError("blur sigma must be positive");
  const auto kernel = gaussian_kernel(sigma);
  const int w = img.width, h = img.height, ch = img.channels;

  std::vector<double> plane(img.samples.begin(), img.samples.end());
  std::vector<double> tmp(plane.size());

  // Horizontal pass, one row of one channel at a time.
#pragma omp parallel for collapse(2) schedule(static) if (Parallel)
  for (int y = 0; y < h; ++y) {
    for (int c = 0; c < ch; ++c) {
      convolve_row(plane.data() + static_cast<std::size_t>(y) * w * ch + c,
                   tmp.data() + static_cast<std::size_t>(y) * w * ch + c, w, ch,
                   kernel);
    }
  }
  // Vertical pass.
#pragma omp parallel for collapse(2) schedule(static) if (Parallel)
  for (int x = 0; x < w; ++x) {
    for (int c = 0; c < ch; ++c) {
      convolve_row(tmp.data() + static_cast<std::size_t>(x) * ch + c,
                   plane.data() + static_cast<std::size_t>(x) * ch + c, h,
                   w * ch, kernel);
    }
  }

  Raster out{w, h, ch, std::vector<std::uint8_t>(img.samples.size())};
  for (std::size_t i = 0; i < plane.size(); ++i) {
    out.samples[i] =
        static_cast<std::uint8_t>(std::clamp<long>(std::lround(plane[i]), 0, 255));
  }
  return out;
}

}  // namespace

void Raster::validate() const {
  if (width <= 0 || height <= 0) {
    throw ValidationError("raster dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw ValidationError("raster must have 1 or 3 channels");
  }
  const auto expect =
      static_cast<std::size_t>(width) * height * channels;
  if (samples.size() != expect) {
    throw ValidationError("raster sample count does not match dimensions");
  }
}

Raster parse_pnm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError("pnm: expected P5 or P6 magic");
  }
  Raster img;
  img.channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  img.width = next_header_int(bytes, pos);
  img.height = next_header_int(bytes, pos);
  const int maxval = next_header_int(bytes, pos);
  if (maxval != 255) throw ParseError("pnm: only maxval 255 supported");
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError("pnm: missing whitespace after maxval");
  }
  ++pos;  // single whitespace byte before binary data
  const auto expect =
      static_cast<std::size_t>(img.width) * img.height * img.channels;
  if (bytes.size() - pos != expect) {
    throw ParseError("pnm: pixel data length mismatch");
  }
  img.samples.assign(bytes.begin() + pos, bytes.end());
  img.validate();
  return img;
}

std::string serialize_pnm(const Raster& img) {
  img.validate();
  std::ostringstream out;
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::string s = out.str();
  s.append(img.samples.begin(), img.samples.end());
  return s;
}

Raster read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pnm(ss.str());
}

void write_pnm(const std::string& path, const Raster& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::string s = serialize_pnm(img);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

Raster gaussian_blur_serial(const Raster& img, double sigma) {
  return blur_impl<false>(img, sigma);
}

Raster gaussian_blur(const Raster& img, double sigma) {
  return blur_impl<true>(img, sigma);
}

}  // namespace palletmap
