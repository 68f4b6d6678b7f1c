#include "ambient/eval_metrics.hpp"

#include <cmath>
#include <string>

#include "ambient/error.hpp"
#include "ambient/parallel.hpp"

namespace ambient {

Mask Mask::empty(std::size_t rows, std::size_t cols) {
  Mask m;
  m.rows = rows;
  m.cols = cols;
  m.pixels.assign(rows * cols, 0);
  return m;
}

double iou(const Mask& pred, const Mask& gt) {
  if (pred.rows != gt.rows || pred.cols != gt.cols || pred.pixels.size() != gt.pixels.size() ||
      pred.pixels.size() != pred.rows * pred.cols)
    fail(Errc::RasterMismatch, std::to_string(pred.rows) + "x" + std::to_string(pred.cols) + " vs " +
                                   std::to_string(gt.rows) + "x" + std::to_string(gt.cols));
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const bool a = pred.pixels[i] != 0, b = gt.pixels[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::array<double, 10> ap_thresholds() {
  std::array<double, 10> t{};
  for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = (50.0 + 5.0 * i) / 100.0;
  return t;
}

ApSummary ap_summary(std::span<const double> scores) {
  if (scores.empty()) fail(Errc::EmptyScoreList, "no scores");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) fail(Errc::InvalidArgument, "score " + std::to_string(s) + " outside [0, 1]");
  ApSummary out;
  double total = 0.0;
  for (double alpha : ap_thresholds()) {
    std::size_t hits = 0;
    for (double s : scores) hits += s >= alpha;
    const double frac = static_cast<double>(hits) / static_cast<double>(scores.size());
    out.ap_at.emplace_back(alpha, frac);
    total += frac;
  }
  out.mean = 0.1 * total;
  return out;
}

void KeypointInstance::validate() const {
  if (pred.size() != gt.size() || visibility.size() != gt.size())
    fail(Errc::DimMismatch, "pred, gt and visibility must have the same length");
  if (!falloff.empty() && falloff.size() != gt.size()) fail(Errc::DimMismatch, "falloff length must match keypoints");
  for (int v : visibility)
    if (v < 0 || v > 2) fail(Errc::InvalidArgument, "visibility must be 0, 1 or 2");
}

const std::array<double, 17>& coco_sigmas() {
  static const std::array<double, 17> s = {0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
                                           0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};
  return s;
}

std::vector<double> default_falloff(std::size_t keypoints) {
  if (keypoints == coco_sigmas().size()) {
    std::vector<double> k(keypoints);
    for (std::size_t i = 0; i < keypoints; ++i) k[i] = 2.0 * coco_sigmas()[i];
    return k;
  }
  return std::vector<double>(keypoints, 0.1);
}

double oks(const KeypointInstance& inst) {
  inst.validate();
  const auto falloff = inst.falloff.empty() ? default_falloff(inst.size()) : inst.falloff;
  double num = 0.0;
  std::size_t visible = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst.visibility[i] <= 0) continue;
    ++visible;
    const double dx = inst.pred[i].x - inst.gt[i].x, dy = inst.pred[i].y - inst.gt[i].y;
    const double d2 = dx * dx + dy * dy;
    num += std::exp(-d2 / (2.0 * inst.scale * inst.scale * falloff[i] * falloff[i]));
  }
  if (visible == 0) fail(Errc::NoVisibleKeypoints, "no keypoint has v > 0");
  if (!(inst.scale > 0.0)) fail(Errc::InvalidArgument, "object scale must be > 0");
  return num / static_cast<double>(visible);
}

double pck(std::span<const KeypointInstance> instances, std::size_t keypoint, double alpha) {
  std::size_t hits = 0, visible = 0;
  for (const auto& inst : instances) {
    inst.validate();
    if (keypoint >= inst.size()) fail(Errc::DimMismatch, "keypoint index out of range");
    if (inst.visibility[keypoint] <= 0) continue;
    ++visible;
    const double dx = inst.pred[keypoint].x - inst.gt[keypoint].x;
    const double dy = inst.pred[keypoint].y - inst.gt[keypoint].y;
    const double diag = std::sqrt(inst.bbox_h * inst.bbox_h + inst.bbox_w * inst.bbox_w);
    hits += std::sqrt(dx * dx + dy * dy) <= alpha * diag;
  }
  if (visible == 0) fail(Errc::NoVisibleKeypoints, "keypoint " + std::to_string(keypoint) + " is never visible");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(visible);
}

std::vector<double> oks_batch(std::span<const KeypointInstance> instances) {
  std::vector<double> out(instances.size());
  ErrorSlot err;
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = oks(instances[static_cast<std::size_t>(i)]);
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow_if_set();
  return out;
}

}  // namespace ambient
