// Serial vs OpenMP kernel comparison: Gaussian blur and batch IoU.

#include <benchmark/benchmark.h>

#include <vector>

#include "palletmap/geometry.hpp"
#include "palletmap/raster.hpp"
#include "palletmap/rng.hpp"

using namespace palletmap;

namespace {

Raster make_image(int w, int h) {
  Raster img{w, h, 3, std::vector<std::uint8_t>(
                          static_cast<std::size_t>(w) * h * 3)};
  SplitMix64 rng(7);
  for (auto& s : img.samples) s = static_cast<std::uint8_t>(rng.next_below(256));
  return img;
}

std::vector<BoundingBox> make_boxes(int n) {
  std::vector<BoundingBox> boxes;
  SplitMix64 rng(11);
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.uniform(0.0, 500.0);
    const double y1 = rng.uniform(0.0, 500.0);
    boxes.emplace_back(x1, y1, x1 + rng.uniform(1.0, 100.0),
                       y1 + rng.uniform(1.0, 100.0));
  }
  return boxes;
}

void bm_blur_serial(benchmark::State& state) {
  const Raster img = make_image(960, 720);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_blur_serial(img, 1.1));
  }
}

void bm_blur_omp(benchmark::State& state) {
  const Raster img = make_image(960, 720);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_blur(img, 1.1));
  }
}

void bm_iou_pairs_serial(benchmark::State& state) {
  const auto boxes = make_boxes(1000);
  for (auto _ : state) {
    double acc = 0.0;
    for (const auto& a : boxes) {
      for (const auto& b : boxes) acc += iou(a, b);
    }
    benchmark::DoNotOptimize(acc);
  }
}

void bm_iou_pairs_omp(benchmark::State& state) {
  const auto boxes = make_boxes(1000);
  const int n = static_cast<int>(boxes.size());
  for (auto _ : state) {
    double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) acc += iou(boxes[i], boxes[j]);
    }
    benchmark::DoNotOptimize(acc);
  }
}

BENCHMARK(bm_blur_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_blur_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_iou_pairs_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_iou_pairs_omp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
