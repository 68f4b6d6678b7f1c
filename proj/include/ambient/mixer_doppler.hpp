#pragma once

#include <span>
#include <string>
#include <vector>

#include "ambient/signal_model.hpp"
#include "ambient/types.hpp"

namespace ambient {

// Per-antenna baseband streams z_i(t); all channels share one time base.
struct BasebandStream {
  std::vector<std::vector<Complex>> channels;
  double sample_rate_hz = 1.0;
  double t0_s = 0.0;
  std::string geometry_ref;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  double time_at(std::size_t n) const { return t0_s + static_cast<double>(n) / sample_rate_hz; }
  void validate() const;
};

struct DopplerConfig {
  double t_delta_s = 0.0;          // must be an integer multiple of the sample period
  double lowpass_cutoff_hz = 0.0;  // 0 means subcarrier_spacing / 2
  PathModel path_model = PathModel::OneWay;
};

// y[n] = r[n] * conj(s[n]).
SampledSignal self_mix(const SampledSignal& r, const SampledSignal& s);

// Ideal brick-wall low-pass: zeroes every DFT bin with |f| > cutoff_hz over
// the whole input block. The block is treated as one period, so feed it
// whole OFDM symbols.
SampledSignal lowpass_isolate(const SampledSignal& y, double cutoff_hz);

struct BasebandSample {
  std::vector<Complex> per_reflector;  // z_l(t)
  Complex total{};                     // sum_l z_l(t)
};

// z_l(t) = |beta|^2 alpha_l sum_k |X_k|^2 exp(-j 2pi (f_c + k f_delta) tau_l(t)),
// evaluated by direct summation over subcarriers.
BasebandSample analytic_baseband(const OfdmConfig& cfg, const Scene& scene, double t_s);

// Closed-form evaluation of sum_k |X_k|^2 exp(-j 2pi (f_c + k f_delta) tau):
// subcarriers are grouped into runs of consecutive indices with equal power
// and each run is summed as a geometric series.
class SubcarrierKernel {
 public:
  explicit SubcarrierKernel(const OfdmConfig& cfg);

  Complex operator()(double tau_s) const;
  double total_power() const { return total_power_; }

 private:
  struct Run {
    int first;
    int count;
    double power;
  };
  double carrier_hz_;
  double spacing_hz_;
  double total_power_ = 0.0;
  std::vector<Run> runs_;
};

// Total baseband z(t_n), n = 0..count-1, t_n = t0 + n/fs. `extra_path_m`
// (one entry per reflector, optional) is added to each path distance; the
// simulator uses it for per-antenna geometry.
//  Exec::Serial   direct subcarrier summation, one sample after another
//  Exec::Parallel closed-form SubcarrierKernel, OpenMP over samples
std::vector<Complex> baseband_series(const OfdmConfig& cfg, const Scene& scene, double sample_rate_hz,
                                     double t0_s, std::size_t count, std::span<const double> extra_path_m = {},
                                     Exec exec = Exec::Parallel);

// Magnitude of d(arg z)/dd, i.e. 2 pi f_c / c (rad/m).
double phase_to_distance_slope(const OfdmConfig& cfg);

// Removes jumps larger than pi between consecutive samples by adding
// multiples of 2 pi (same rule as numpy.unwrap).
std::vector<double> unwrap(std::span<const double> phase);

struct VelocityTrace {
  std::vector<double> t_s;
  std::vector<double> phase_rate_rad_s;  // (arg z(t) - arg z(t - T)) / T, unwrapped
  std::vector<double> velocity_mps;      // -c * rate / (2 pi f_c), halved for RoundTrip
};

// Phase rate over a lag of T_delta and the matching radial velocity.
// Positive velocity means the path length is growing.
VelocityTrace estimate_velocity(const SampledSignal& z, const OfdmConfig& cfg, const DopplerConfig& dc);

}  // namespace ambient
