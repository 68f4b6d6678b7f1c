#include "ambient/mixer_doppler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "ambient/error.hpp"
#include "ambient/parallel.hpp"

namespace ambient {

void BasebandStream::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    fail(Errc::ValidationError, "sample_rate_hz must be > 0");
  for (const auto& ch : channels)
    if (ch.size() != length()) fail(Errc::LengthMismatch, "baseband channels differ in length");
}

SampledSignal self_mix(const SampledSignal& r, const SampledSignal& s) {
  if (r.samples.size() != s.samples.size())
    fail(Errc::LengthMismatch, std::to_string(r.samples.size()) + " vs " + std::to_string(s.samples.size()));
  if (r.sample_rate_hz != s.sample_rate_hz) fail(Errc::RateMismatch, "sample rates differ");
  if (std::abs(r.t0_s - s.t0_s) * r.sample_rate_hz > 1e-6) fail(Errc::LengthMismatch, "start times differ");

  SampledSignal y;
  y.sample_rate_hz = r.sample_rate_hz;
  y.t0_s = r.t0_s;
  y.samples.resize(r.samples.size());
  for (std::size_t i = 0; i < y.samples.size(); ++i) y.samples[i] = r.samples[i] * std::conj(s.samples[i]);
  return y;
}

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

SampledSignal lowpass_isolate(const SampledSignal& y, double cutoff_hz) {
  if (!(cutoff_hz > 0.0)) fail(Errc::InvalidArgument, "cutoff must be > 0");
  if (!(cutoff_hz < y.sample_rate_hz / 2.0))
    fail(Errc::CutoffAboveNyquist, std::to_string(cutoff_hz) + " Hz >= fs/2");

  SampledSignal z;
  z.sample_rate_hz = y.sample_rate_hz;
  z.t0_s = y.t0_s;
  const std::size_t n = y.samples.size();
  if (n == 0) return z;

  static_assert(sizeof(fftw_complex) == sizeof(Complex));
  std::vector<Complex> spec(n);
  z.samples.resize(n);
  auto* in = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(y.samples.data()));
  auto* mid = reinterpret_cast<fftw_complex*>(spec.data());
  auto* out = reinterpret_cast<fftw_complex*>(z.samples.data());

  fftw_plan fwd, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    // FFTW_ESTIMATE does not touch the arrays while planning.
    fwd = fftw_plan_dft_1d(static_cast<int>(n), in, mid, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(static_cast<int>(n), mid, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  const double bin_hz = y.sample_rate_hz / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double idx = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    if (std::abs(idx * bin_hz) > cutoff_hz) spec[k] = 0.0;
  }
  fftw_execute(inv);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : z.samples) v *= scale;
  return z;
}

namespace {

Complex direct_subcarrier_sum(const OfdmConfig& cfg, double tau) {
  Complex acc{};
  for (std::size_t i = 0; i < cfg.subcarriers.size(); ++i) {
    const double f = cfg.carrier_hz + cfg.subcarriers[i] * cfg.subcarrier_spacing_hz;
    acc += std::norm(cfg.qam_symbols[i]) * std::polar(1.0, -kTwoPi * f * tau);
  }
  return acc;
}

}  // namespace

BasebandSample analytic_baseband(const OfdmConfig& cfg, const Scene& scene, double t_s) {
  BasebandSample out;
  out.per_reflector.reserve(scene.reflectors.size());
  const double gain = std::norm(scene.beta);
  for (const auto& refl : scene.reflectors) {
    const double tau = delay_of(trajectory_distance(refl, t_s), scene.path_model);
    const Complex z = gain * refl.alpha * direct_subcarrier_sum(cfg, tau);
    out.per_reflector.push_back(z);
    out.total += z;
  }
  return out;
}

SubcarrierKernel::SubcarrierKernel(const OfdmConfig& cfg)
    : carrier_hz_(cfg.carrier_hz), spacing_hz_(cfg.subcarrier_spacing_hz) {
  std::vector<std::pair<int, double>> sorted;
  for (std::size_t i = 0; i < cfg.subcarriers.size(); ++i)
    sorted.emplace_back(cfg.subcarriers[i], std::norm(cfg.qam_symbols[i]));
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [k, p] : sorted) {
    total_power_ += p;
    if (!runs_.empty() && runs_.back().first + runs_.back().count == k && runs_.back().power == p)
      ++runs_.back().count;
    else
      runs_.push_back({k, 1, p});
  }
}

Complex SubcarrierKernel::operator()(double tau_s) const {
  const double a = kTwoPi * spacing_hz_ * tau_s;
  const double half_sin = std::sin(a / 2.0);
  Complex acc{};
  for (const auto& run : runs_) {
    Complex s;
    if (std::abs(half_sin) < 1e-12) {
      for (int k = run.first; k < run.first + run.count; ++k) s += std::polar(1.0, -a * k);
    } else {
      const double center = run.first + (run.count - 1) / 2.0;
      s = std::polar(std::sin(run.count * a / 2.0) / half_sin, -a * center);
    }
    acc += run.power * s;
  }
  return acc * std::polar(1.0, -kTwoPi * carrier_hz_ * tau_s);
}

namespace {

void check_span(const Scene& scene, double t0, double t1) {
  for (const auto& refl : scene.reflectors) {
    trajectory_distance(refl, t0);
    trajectory_distance(refl, t1);
  }
}

}  // namespace

std::vector<Complex> baseband_series(const OfdmConfig& cfg, const Scene& scene, double sample_rate_hz,
                                     double t0_s, std::size_t count, std::span<const double> extra_path_m,
                                     Exec exec) {
  if (!extra_path_m.empty() && extra_path_m.size() != scene.reflectors.size())
    fail(Errc::InvalidArgument, "extra_path_m needs one entry per reflector");
  std::vector<Complex> out(count);
  if (count == 0) return out;
  check_span(scene, t0_s, t0_s + static_cast<double>(count - 1) / sample_rate_hz);

  const double gain = std::norm(scene.beta);
  const auto extra = [&](std::size_t l) { return extra_path_m.empty() ? 0.0 : extra_path_m[l]; };

  if (exec == Exec::Serial) {
    for (std::size_t n = 0; n < count; ++n) {
      const double t = t0_s + static_cast<double>(n) / sample_rate_hz;
      Complex z{};
      for (std::size_t l = 0; l < scene.reflectors.size(); ++l) {
        const auto& refl = scene.reflectors[l];
        const double tau = delay_of(trajectory_distance(refl, t) + extra(l), scene.path_model);
        z += gain * refl.alpha * direct_subcarrier_sum(cfg, tau);
      }
      out[n] = z;
    }
    return out;
  }

  const SubcarrierKernel kernel(cfg);
  const auto total = static_cast<std::ptrdiff_t>(count);
  ErrorSlot err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < total; ++n) {
    try {
      const double t = t0_s + static_cast<double>(n) / sample_rate_hz;
      Complex z{};
      for (std::size_t l = 0; l < scene.reflectors.size(); ++l) {
        const auto& refl = scene.reflectors[l];
        const double tau = delay_of(trajectory_distance(refl, t) + extra(l), scene.path_model);
        z += gain * refl.alpha * kernel(tau);
      }
      out[static_cast<std::size_t>(n)] = z;
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow_if_set();
  return out;
}

double phase_to_distance_slope(const OfdmConfig& cfg) { return kTwoPi * cfg.carrier_hz / kSpeedOfLight; }

std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  double correction = 0.0;
  for (std::size_t i = 1; i < phase.size(); ++i) {
    const double d = phase[i] - phase[i - 1];
    if (std::abs(d) >= kPi) {
      double dmod = std::fmod(d + kPi, kTwoPi);
      if (dmod < 0.0) dmod += kTwoPi;
      dmod -= kPi;
      if (dmod == -kPi && d > 0.0) dmod = kPi;
      correction += dmod - d;
    }
    out[i] = phase[i] + correction;
  }
  return out;
}

VelocityTrace estimate_velocity(const SampledSignal& z, const OfdmConfig& cfg, const DopplerConfig& dc) {
  if (!(dc.t_delta_s > 0.0)) fail(Errc::InvalidArgument, "t_delta_s must be > 0");
  const double lag_f = dc.t_delta_s * z.sample_rate_hz;
  const auto lag = static_cast<std::size_t>(std::llround(lag_f));
  if (lag == 0 || std::abs(lag_f - static_cast<double>(lag)) > 1e-6 * std::max(1.0, lag_f))
    fail(Errc::InvalidArgument, "t_delta_s must be a positive integer multiple of the sample period");
  if (z.samples.size() <= lag)
    fail(Errc::SequenceTooShort, std::to_string(z.samples.size()) + " samples for lag " + std::to_string(lag));

  double peak = 0.0;
  for (const auto& v : z.samples) peak = std::max(peak, std::abs(v));
  std::vector<double> phase(z.samples.size());
  for (std::size_t i = 0; i < z.samples.size(); ++i) {
    if (!(std::abs(z.samples[i]) > 1e-12 * peak) || peak == 0.0)
      fail(Errc::ZeroMagnitudeSample, "sample " + std::to_string(i));
    phase[i] = std::arg(z.samples[i]);
  }
  const auto unwrapped = unwrap(phase);

  const double t_delta = static_cast<double>(lag) / z.sample_rate_hz;
  const double to_velocity = -kSpeedOfLight / (kTwoPi * cfg.carrier_hz) /
                             (dc.path_model == PathModel::RoundTrip ? 2.0 : 1.0);
  VelocityTrace out;
  const std::size_t n = z.samples.size() - lag;
  out.t_s.resize(n);
  out.phase_rate_rad_s.resize(n);
  out.velocity_mps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = (unwrapped[i + lag] - unwrapped[i]) / t_delta;
    out.t_s[i] = z.time_at(i + lag);
    out.phase_rate_rad_s[i] = rate;
    out.velocity_mps[i] = rate * to_velocity;
  }
  return out;
}

}  // namespace ambient
