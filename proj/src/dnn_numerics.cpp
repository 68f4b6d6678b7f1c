#include "ambient/dnn_numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ambient/error.hpp"
#include "ambient/parallel.hpp"

namespace ambient {

FrameTensor FrameTensor::zeros(std::size_t f, std::size_t h, std::size_t w) {
  FrameTensor t;
  t.frames = f;
  t.height = h;
  t.width = w;
  t.data.assign(f * h * w, 0.0);
  return t;
}

void FrameTensor::validate() const {
  if (frames == 0 || height == 0 || width == 0) fail(Errc::InvalidArgument, "tensor dims must be >= 1");
  if (data.size() != frames * height * width) fail(Errc::DimMismatch, "tensor data size does not match F*H*W");
  for (double v : data)
    if (!std::isfinite(v)) fail(Errc::InvalidArgument, "tensor holds a non-finite value");
}

PatchSequence split_patches(const FrameTensor& x, std::size_t p) {
  x.validate();
  if (p == 0 || x.height % p != 0 || x.width % p != 0)
    fail(Errc::PatchSizeIndivisible, "patch size " + std::to_string(p) + " does not divide " +
                                         std::to_string(x.height) + "x" + std::to_string(x.width));
  const std::size_t bw = x.width / p;
  PatchSequence seq;
  seq.patch_size = p;
  seq.patch_count = (x.height / p) * bw;
  seq.row_length = x.frames * p * p;
  seq.data.resize(seq.patch_count * seq.row_length);

  for (std::size_t n = 0; n < seq.patch_count; ++n) {
    const std::size_t h0 = (n / bw) * p, w0 = (n % bw) * p;
    double* out = seq.data.data() + n * seq.row_length;
    for (std::size_t f = 0; f < x.frames; ++f)
      for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) *out++ = x.at(f, h0 + r, w0 + c);
  }
  return seq;
}

FrameTensor merge_patches(const PatchSequence& seq, std::size_t frames, std::size_t height, std::size_t width) {
  const std::size_t p = seq.patch_size;
  if (p == 0 || height % p != 0 || width % p != 0) fail(Errc::PatchSizeIndivisible, "patch size does not divide dims");
  if (seq.patch_count != (height / p) * (width / p) || seq.row_length != frames * p * p ||
      seq.data.size() != seq.patch_count * seq.row_length)
    fail(Errc::DimMismatch, "patch sequence does not match the requested tensor shape");

  auto x = FrameTensor::zeros(frames, height, width);
  const std::size_t bw = width / p;
  for (std::size_t n = 0; n < seq.patch_count; ++n) {
    const std::size_t h0 = (n / bw) * p, w0 = (n % bw) * p;
    const double* in = seq.data.data() + n * seq.row_length;
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) x.at(f, h0 + r, w0 + c) = *in++;
  }
  return x;
}

DecoderShape decoder_shape(int stage, std::size_t channels, std::size_t height, std::size_t width,
                           std::size_t patch_size) {
  if (stage != 1 && stage != 2) fail(Errc::IndivisibleDims, "decoder stage must be 1 or 2");
  const std::size_t scale = std::size_t{1} << stage;
  if (channels % scale != 0) fail(Errc::IndivisibleDims, "C not divisible by 2^i");
  if (patch_size == 0 || height % patch_size != 0 || width % patch_size != 0)
    fail(Errc::IndivisibleDims, "H, W not divisible by P");
  return {channels / scale, scale * height / patch_size, scale * width / patch_size};
}

void LossParams::validate() const {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0) || !(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    fail(Errc::InvalidArgument, "loss weights must be >= 0");
  if (!(epsilon > 0.0)) fail(Errc::InvalidArgument, "epsilon must be > 0");
  if (!(delta >= 0.0)) fail(Errc::InvalidArgument, "delta must be >= 0");
  if (keypoint_count < 1) fail(Errc::InvalidArgument, "keypoint_count must be >= 1");
  if (!keypoint_weights.empty() && keypoint_weights.size() != keypoint_count)
    fail(Errc::DimMismatch, "keypoint_weights length must equal keypoint_count");
  for (double w : keypoint_weights)
    if (!(w >= 0.0)) fail(Errc::InvalidArgument, "keypoint weights must be >= 0");
}

LossResult mask_loss(std::span<const double> x, std::span<const double> y, const LossParams& params) {
  params.validate();
  if (x.size() != y.size())
    fail(Errc::LengthMismatch, std::to_string(x.size()) + " predictions vs " + std::to_string(y.size()) + " targets");
  for (double t : y)
    if (t != 0.0 && t != 1.0) fail(Errc::NonBinaryTarget, "target value " + std::to_string(t) + " is not 0 or 1");

  const std::size_t n = x.size();
  const double bce_scale = params.bce_mean && n > 0 ? 1.0 / static_cast<double>(n) : 1.0;
  std::vector<double> xc(n);
  std::vector<bool> clamped(n);
  double bce = 0.0, sxy = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xc[i] = std::clamp(x[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    clamped[i] = xc[i] != x[i];
    bce += y[i] * std::log(xc[i]) + (1.0 - y[i]) * std::log(1.0 - xc[i]);
    sxy += xc[i] * y[i];
    sq += xc[i] * xc[i] + y[i] * y[i];
  }
  const double num = 2.0 * sxy + params.epsilon;
  const double den = sq + params.epsilon;

  LossResult r;
  r.value = -params.alpha1 * bce_scale * bce + params.alpha2 * (1.0 - num / den);
  r.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (clamped[i]) continue;
    const double d_bce = -(y[i] / xc[i] - (1.0 - y[i]) / (1.0 - xc[i]));
    const double d_dice = (2.0 * y[i] * den - num * 2.0 * xc[i]) / (den * den);
    r.grad[i] = params.alpha1 * bce_scale * d_bce - params.alpha2 * d_dice;
  }
  return r;
}

LossResult keypoint_loss(std::span<const double> pred, std::span<const double> target, const LossParams& params) {
  params.validate();
  const std::size_t k = params.keypoint_count;
  if (pred.size() != target.size())
    fail(Errc::DimMismatch, std::to_string(pred.size()) + " predicted vs " + std::to_string(target.size()) +
                                " target values");
  if (pred.empty() || pred.size() % k != 0) fail(Errc::DimMismatch, "heatmap size not divisible by keypoint_count");
  for (double t : target)
    if (!(t >= 0.0 && t <= 1.0)) fail(Errc::InvalidArgument, "target heatmap values must lie in [0, 1]");

  const std::size_t pixels = pred.size() / k;
  LossResult r;
  r.grad.resize(pred.size());
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double w = params.keypoint_weights.empty() ? 1.0 : params.keypoint_weights[kk];
    const double scale = w / (static_cast<double>(k) * static_cast<double>(pixels));
    for (std::size_t i = kk * pixels; i < (kk + 1) * pixels; ++i) {
      const double diff = pred[i] - target[i];
      r.value += scale * (target[i] + 1.0) * diff * diff;
      r.grad[i] = scale * 2.0 * (target[i] + 1.0) * diff;
    }
  }
  return r;
}

GroupingResult grouping_loss(const PersonTags& tags, const LossParams& params) {
  params.validate();
  if (tags.empty()) fail(Errc::EmptyPersonList, "no persons");
  const std::size_t np = tags.size();
  std::vector<double> mean(np, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    if (tags[p].empty()) fail(Errc::InvalidArgument, "person " + std::to_string(p) + " has no visible keypoint tag");
    for (double e : tags[p]) mean[p] += e;
    mean[p] /= static_cast<double>(tags[p].size());
  }

  GroupingResult r;
  r.grad.resize(np);
  const double pull_scale = params.lambda1 / static_cast<double>(np);
  for (std::size_t p = 0; p < np; ++p) {
    const double kp = static_cast<double>(tags[p].size());
    r.grad[p].resize(tags[p].size());
    for (std::size_t k = 0; k < tags[p].size(); ++k) {
      const double d = tags[p][k] - mean[p];
      r.value += pull_scale * d * d / kp;
      r.grad[p][k] = pull_scale * 2.0 * d / kp;
    }
  }

  if (np >= 2) {
    const double push_scale = params.lambda2 / static_cast<double>(np * (np - 1));
    std::vector<double> d_mean(np, 0.0);
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        if (i == j) continue;
        const double gap = mean[i] - mean[j];
        const double h = params.delta - std::abs(gap);
        if (h <= 0.0) continue;
        r.value += push_scale * h;
        const double s = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
        d_mean[i] -= push_scale * s;
        d_mean[j] += push_scale * s;
      }
    }
    for (std::size_t p = 0; p < np; ++p)
      for (auto& g : r.grad[p]) g += d_mean[p] / static_cast<double>(tags[p].size());
  }
  return r;
}

std::vector<double> mask_loss_batch(std::span<const MaskInstance> instances, const LossParams& params) {
  std::vector<double> out(instances.size());
  ErrorSlot err;
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& inst = instances[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = mask_loss(inst.x, inst.y, params).value;
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow_if_set();
  return out;
}

}  // namespace ambient
