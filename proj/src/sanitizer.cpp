#include "ambient/sanitizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ambient/butterworth.hpp"
#include "ambient/error.hpp"
#include "ambient/kmeans.hpp"
#include "ambient/lof.hpp"
#include "ambient/parallel.hpp"

namespace ambient {

namespace {

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  return (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)) + hi) / 2.0;
}

}  // namespace

void SanitizeConfig::validate() const {
  if (butterworth_order < 1) fail(Errc::OrderZero, "butterworth_order must be >= 1");
  if (!(butterworth_cutoff_hz > 0.0)) fail(Errc::ValidationError, "butterworth_cutoff_hz must be > 0");
  if (bias_k < 1 || lof_k < 1 || project_k < 1) fail(Errc::ValidationError, "cluster/neighbour counts must be >= 1");
  if (origin_radius && !(*origin_radius >= 0.0)) fail(Errc::ValidationError, "origin_radius must be >= 0");
  if (!(origin_radius_rms_fraction >= 0.0)) fail(Errc::ValidationError, "origin_radius_rms_fraction must be >= 0");
  if (!(lof_threshold > 1.0)) fail(Errc::ValidationError, "lof_threshold must be > 1");
  if (!(window_s > 0.0)) fail(Errc::ValidationError, "window_s must be > 0");
  if (decimation < 1) fail(Errc::ValidationError, "decimation must be >= 1");
}

ConstellationFrame bias_correct(const ConstellationFrame& frame, const SanitizeConfig& cfg) {
  const auto km = kmeans(frame.points, cfg.bias_k, cfg.rng_seed);
  // Duplicate-heavy frames can leave clusters without members; those never qualify.
  std::size_t closest = km.centroids.size();
  for (std::size_t c = 0; c < km.centroids.size(); ++c)
    if (km.sizes[c] > 0 && (closest == km.centroids.size() || std::abs(km.centroids[c]) < std::abs(km.centroids[closest])))
      closest = c;
  // Median of the members so stray points swept into the cluster do not drag the shift.
  std::vector<double> re, im;
  for (std::size_t i = 0; i < frame.points.size(); ++i)
    if (static_cast<std::size_t>(km.assignment[i]) == closest) {
      re.push_back(frame.points[i].real());
      im.push_back(frame.points[i].imag());
    }
  const Complex shift(median(re), median(im));

  ConstellationFrame out = frame;
  for (auto& p : out.points) p -= shift;
  return out;
}

ConstellationFrame discard_near_origin(const ConstellationFrame& frame, double radius) {
  ConstellationFrame out;
  out.window_start_s = frame.window_start_s;
  out.window_len_s = frame.window_len_s;
  std::copy_if(frame.points.begin(), frame.points.end(), std::back_inserter(out.points),
               [radius](const Complex& p) { return std::abs(p) > radius; });
  return out;
}

ConstellationFrame lof_filter(const ConstellationFrame& frame, std::size_t lof_k, double threshold, Exec exec) {
  const auto scores = lof_scores(frame.points, lof_k, exec);
  ConstellationFrame out;
  out.window_start_s = frame.window_start_s;
  out.window_len_s = frame.window_len_s;
  for (std::size_t i = 0; i < frame.points.size(); ++i)
    if (!(scores[i] > threshold)) out.points.push_back(frame.points[i]);
  return out;
}

Complex project(const ConstellationFrame& frame, std::size_t project_k, std::uint64_t seed) {
  if (frame.points.empty()) fail(Errc::EmptyFrame, "nothing left to project");
  if (frame.points.size() < project_k) {
    Complex sum{};
    for (const auto& p : frame.points) sum += p;
    return sum / static_cast<double>(frame.points.size());
  }
  const auto km = kmeans(frame.points, project_k, seed);
  std::size_t best = 0;
  for (std::size_t c = 1; c < km.sizes.size(); ++c)
    if (km.sizes[c] > km.sizes[best]) best = c;
  return km.centroids[best];
}

namespace {

template <class F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

double rms(const std::vector<Complex>& pts) {
  if (pts.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& p : pts) acc += std::norm(p);
  return std::sqrt(acc / static_cast<double>(pts.size()));
}

}  // namespace

Complex sanitize_points(const ConstellationFrame& frame, const SanitizeConfig& cfg) {
  if (frame.points.empty()) throw Error(Errc::EmptyFrame, "window has no samples", "input");
  const double radius = cfg.origin_radius.value_or(cfg.origin_radius_rms_fraction * rms(frame.points));

  auto centred = staged("bias", [&] { return bias_correct(frame, cfg); });
  auto kept = staged("discard", [&] { return discard_near_origin(centred, radius); });
  if (kept.points.empty()) throw Error(Errc::EmptyFrame, "every point fell inside the origin radius", "discard");
  if (kept.points.size() > cfg.lof_k)
    kept = staged("lof", [&] { return lof_filter(kept, cfg.lof_k, cfg.lof_threshold); });
  return staged("project", [&] { return project(kept, cfg.project_k, cfg.rng_seed); });
}

Complex sanitize_window(std::span<const Complex> raw, double sample_rate_hz, const SanitizeConfig& cfg) {
  cfg.validate();
  if (raw.empty()) throw Error(Errc::EmptyFrame, "window has no samples", "input");
  const auto filtered = staged("filter", [&] {
    return butterworth_lowpass(raw, sample_rate_hz, cfg.butterworth_order, cfg.butterworth_cutoff_hz, true);
  });
  ConstellationFrame frame;
  frame.window_len_s = static_cast<double>(raw.size()) / sample_rate_hz;
  for (std::size_t i = 0; i < filtered.size(); i += cfg.decimation) frame.points.push_back(filtered[i]);
  return sanitize_points(frame, cfg);
}

std::vector<SanitizedPoint> sanitize_stream(const SampledSignal& raw, const SanitizeConfig& cfg) {
  cfg.validate();
  const auto filtered = staged("filter", [&] {
    return butterworth_lowpass(raw.samples, raw.sample_rate_hz, cfg.butterworth_order, cfg.butterworth_cutoff_hz,
                               true);
  });
  const auto win = static_cast<std::size_t>(std::llround(cfg.window_s * raw.sample_rate_hz));
  if (win == 0) fail(Errc::ValidationError, "window_s shorter than one sample");
  const std::size_t count = filtered.size() / win;

  std::vector<SanitizedPoint> out(count);
  ErrorSlot err;
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t w = 0; w < total; ++w) {
    try {
      const auto begin = static_cast<std::size_t>(w) * win;
      ConstellationFrame frame;
      frame.window_start_s = raw.time_at(begin);
      frame.window_len_s = static_cast<double>(win) / raw.sample_rate_hz;
      for (std::size_t i = begin; i < begin + win; i += cfg.decimation) frame.points.push_back(filtered[i]);

      auto& slot = out[static_cast<std::size_t>(w)];
      slot.t_s = frame.window_start_s + frame.window_len_s / 2.0;
      try {
        slot.value = sanitize_points(frame, cfg);
        slot.valid = true;
      } catch (const Error& e) {
        if (e.code() != Errc::EmptyFrame) throw;
      }
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow_if_set();
  return out;
}

}  // namespace ambient
