#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ambient {

// Shape constants of the encoder/decoder. Only recorded; no forward pass.
inline constexpr std::size_t kEmbedChannels = 256;
inline constexpr std::size_t kEncoderLayers = 2;
inline constexpr std::size_t kMaskChannels = 1;
inline constexpr std::size_t kKeypointChannels = 26;  // taxonomy unspecified

// data indexed [f][h][w], row-major.
struct FrameTensor {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  static FrameTensor zeros(std::size_t f, std::size_t h, std::size_t w);
  double& at(std::size_t f, std::size_t h, std::size_t w) { return data[(f * height + h) * width + w]; }
  double at(std::size_t f, std::size_t h, std::size_t w) const { return data[(f * height + h) * width + w]; }
  void validate() const;
};

// patch_count rows of row_length = F * P * P values each.
struct PatchSequence {
  std::size_t patch_size = 0;
  std::size_t patch_count = 0;
  std::size_t row_length = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t n) const { return {data.data() + n * row_length, row_length}; }
};

// Row n holds spatial block n (blocks scanned row-major) of frame 0, then of
// frame 1, ... each block flattened row-major.
PatchSequence split_patches(const FrameTensor& x, std::size_t patch_size);
FrameTensor merge_patches(const PatchSequence& seq, std::size_t frames, std::size_t height, std::size_t width);

struct DecoderShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const DecoderShape&, const DecoderShape&) = default;
};

// Stage i in {1, 2}: (C / 2^i, 2^i H / P, 2^i W / P).
DecoderShape decoder_shape(int stage, std::size_t channels, std::size_t height, std::size_t width,
                           std::size_t patch_size);

inline constexpr double kProbabilityClamp = 1e-7;

struct LossParams {
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double epsilon = 1e-6;
  std::vector<double> keypoint_weights;  // empty = all ones
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double delta = 1.0;
  std::size_t keypoint_count = 1;
  bool bce_mean = false;  // divide the BCE sum by N

  void validate() const;
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d prediction
};

// alpha1 * BCE(x, y) + alpha2 * (1 - Dice(x, y)). x is clamped to
// [1e-7, 1 - 1e-7]; the gradient is zero where the clamp is active.
LossResult mask_loss(std::span<const double> x, std::span<const double> y, const LossParams& params);

// pred/target hold keypoint_count heatmaps back to back.
LossResult keypoint_loss(std::span<const double> pred, std::span<const double> target, const LossParams& params);

using PersonTags = std::vector<std::vector<double>>;

struct GroupingResult {
  double value = 0.0;
  PersonTags grad;  // same shape as the tags
};

// Pull term on each person's tag variance plus push hinge over ordered pairs
// of person means. At |e_i - e_j| = 0 the sign is taken as 0.
GroupingResult grouping_loss(const PersonTags& tags, const LossParams& params);

struct MaskInstance {
  std::vector<double> x;
  std::vector<double> y;
};

// mask_loss values for many instances, OpenMP across instances.
std::vector<double> mask_loss_batch(std::span<const MaskInstance> instances, const LossParams& params);

}  // namespace ambient
