#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "ambient/types.hpp"

namespace ambient {

// One OFDM symbol: s(t) = sum_k X_k exp(j 2pi (f_c + k f_delta) t).
struct OfdmConfig {
  double carrier_hz = 0.0;
  double subcarrier_spacing_hz = 0.0;
  std::vector<int> subcarriers;       // signed indices k, no duplicates
  std::vector<Complex> qam_symbols;   // X_k, aligned with `subcarriers`
  double symbol_period_s = 0.0;       // 0 means 1 / subcarrier_spacing_hz

  // Throws ValidationError / EmptySubcarrierSet on broken invariants.
  void validate() const;

  double period() const { return symbol_period_s > 0.0 ? symbol_period_s : 1.0 / subcarrier_spacing_hz; }
  int max_abs_index() const;
  double highest_frequency_hz() const;
  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }

  // s(t) evaluated analytically.
  Complex value_at(double t_s) const;
};

// Contiguous range of subcarrier indices, zero excluded when skip_zero is set.
std::vector<int> subcarrier_range(int lo, int hi, bool skip_zero);

// Unit-energy QPSK symbols (+-1 +-j)/sqrt(2) drawn from a seeded generator.
std::vector<Complex> random_qpsk(std::size_t count, std::uint64_t seed);

OfdmConfig make_ofdm(double carrier_hz, double spacing_hz, std::vector<int> subcarriers,
                     std::vector<Complex> symbols);

struct LinearTrajectory {
  double d0_m = 0.0;
  double v_mps = 0.0;
};

// Piecewise-linear path distance; times strictly increasing.
struct WaypointTrajectory {
  std::vector<std::pair<double, double>> points;  // (t_s, d_m)
};

using Trajectory = std::variant<LinearTrajectory, WaypointTrajectory>;

struct Reflector {
  Complex alpha{1.0, 0.0};
  Trajectory trajectory = LinearTrajectory{};
  // Arrival direction used when the reflector is observed through an array
  // (see beamformer.hpp for the convention). Ignored by single-antenna ops.
  double theta_rad = 0.0;
  double phi_rad = 0.0;
};

double trajectory_distance(const Reflector& refl, double t_s);
void validate_trajectory(const Trajectory& traj);

struct Scene {
  Complex beta{1.0, 0.0};
  std::vector<Reflector> reflectors;
  std::optional<double> noise_snr_db;
  std::uint64_t noise_seed = 0;
  PathModel path_model = PathModel::OneWay;

  void validate() const;
};

struct SampledSignal {
  std::vector<Complex> samples;
  double sample_rate_hz = 1.0;
  double t0_s = 0.0;
  // Set by synthesize_symbol: the symbol the samples came from, so delayed
  // copies can be re-evaluated exactly instead of interpolated.
  std::shared_ptr<const OfdmConfig> source;

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t n) const { return t0_s + static_cast<double>(n) / sample_rate_hz; }
  void validate() const;
};

SampledSignal synthesize_symbol(const OfdmConfig& cfg, double sample_rate_hz, double t0_s);

// r(t) = beta * sum_l alpha_l s(t - tau_l(t)). Exact re-evaluation when the
// input carries its OFDM source; otherwise linear interpolation, with leading
// samples whose delayed argument precedes the input dropped (t0 moves forward).
SampledSignal propagate(const SampledSignal& s, const Scene& scene);

// Complex white Gaussian noise at `snr_db` below the mean power of `x`.
void add_awgn(std::span<Complex> x, double snr_db, std::uint64_t seed);

}  // namespace ambient
