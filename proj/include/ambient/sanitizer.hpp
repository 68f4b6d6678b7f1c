#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ambient/signal_model.hpp"
#include "ambient/types.hpp"

namespace ambient {

struct ConstellationFrame {
  std::vector<Complex> points;
  double window_start_s = 0.0;
  double window_len_s = 1.0;
};

struct SanitizeConfig {
  int butterworth_order = 4;
  double butterworth_cutoff_hz = 200.0;
  std::size_t bias_k = 3;
  // Absolute discard radius; when unset, origin_radius_rms_fraction times the
  // RMS magnitude of the frame entering bias correction.
  std::optional<double> origin_radius;
  double origin_radius_rms_fraction = 0.05;
  std::size_t lof_k = 20;
  double lof_threshold = 1.5;
  std::size_t project_k = 3;
  std::uint64_t rng_seed = 0;
  double window_s = 0.010;
  // Keep every n-th filtered sample before windowing (1 = keep all).
  std::size_t decimation = 40;

  void validate() const;
};

// Translates every point by minus the centroid of the k-means cluster
// closest to the origin.
ConstellationFrame bias_correct(const ConstellationFrame& frame, const SanitizeConfig& cfg);

// Keeps exactly the points with |p| > radius.
ConstellationFrame discard_near_origin(const ConstellationFrame& frame, double radius);

// Drops points whose LOF exceeds `threshold`.
ConstellationFrame lof_filter(const ConstellationFrame& frame, std::size_t lof_k, double threshold,
                              Exec exec = Exec::Parallel);

// Centroid of the most populated k-means cluster (plain centroid when there
// are fewer than project_k points).
Complex project(const ConstellationFrame& frame, std::size_t project_k, std::uint64_t seed);

// Stages after filtering: bias -> discard -> LOF -> project. Errors carry the
// stage name. LOF is skipped when too few points survive the discard.
Complex sanitize_points(const ConstellationFrame& frame, const SanitizeConfig& cfg);

// Full per-window chain: Butterworth on the window, decimation, then
// sanitize_points.
Complex sanitize_window(std::span<const Complex> raw, double sample_rate_hz, const SanitizeConfig& cfg);

struct SanitizedPoint {
  double t_s = 0.0;  // window centre
  Complex value{};
  bool valid = false;  // false when the window came out empty
};

// Stream-wise Butterworth first, then independent windows (OpenMP across
// windows). Only EmptyFrame is absorbed (valid = false); other errors throw.
std::vector<SanitizedPoint> sanitize_stream(const SampledSignal& raw, const SanitizeConfig& cfg);

}  // namespace ambient
