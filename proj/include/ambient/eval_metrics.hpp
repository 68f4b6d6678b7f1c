#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ambient {

// Binary raster, row-major; any nonzero pixel is foreground.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;

  static Mask empty(std::size_t rows, std::size_t cols);
};

// |P & G| / |P | G|; 1 when both are empty.
double iou(const Mask& pred, const Mask& gt);

// 0.50, 0.55, ..., 0.95.
std::array<double, 10> ap_thresholds();

struct ApSummary {
  std::vector<std::pair<double, double>> ap_at;  // (alpha, fraction of scores >= alpha)
  double mean = 0.0;
};

// Per-instance threshold fraction, not precision-recall integration. AR uses
// the same computation.
ApSummary ap_summary(std::span<const double> scores);
inline ApSummary ar_summary(std::span<const double> scores) { return ap_summary(scores); }

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct KeypointInstance {
  std::vector<Point2> pred;
  std::vector<Point2> gt;
  std::vector<int> visibility;  // 0 absent, 1 occluded, 2 visible
  double scale = 0.0;           // sqrt(bbox area)
  std::vector<double> falloff;  // empty = default_falloff(K)
  double bbox_h = 0.0;
  double bbox_w = 0.0;

  std::size_t size() const { return gt.size(); }
  void validate() const;
};

const std::array<double, 17>& coco_sigmas();

// 2 * sigma_i for 17 keypoints (COCO), 0.1 otherwise.
std::vector<double> default_falloff(std::size_t keypoints);

// Mean over visible keypoints of exp(-d^2 / (2 s^2 k^2)).
double oks(const KeypointInstance& inst);

// Percentage of visible instances whose keypoint k lies within
// alpha * bbox diagonal (inclusive) of the ground truth.
double pck(std::span<const KeypointInstance> instances, std::size_t keypoint, double alpha);

// oks() for every instance, OpenMP across instances.
std::vector<double> oks_batch(std::span<const KeypointInstance> instances);

}  // namespace ambient
