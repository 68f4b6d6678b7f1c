#include "ambient/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "ambient/error.hpp"

namespace ambient {

void OfdmConfig::validate() const {
  if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) fail(Errc::ValidationError, "carrier_hz must be > 0");
  if (!(subcarrier_spacing_hz > 0.0) || !std::isfinite(subcarrier_spacing_hz))
    fail(Errc::ValidationError, "subcarrier_spacing_hz must be > 0");
  if (!(subcarrier_spacing_hz < carrier_hz))
    fail(Errc::ValidationError, "subcarrier_spacing_hz must be below carrier_hz");
  if (subcarriers.empty()) fail(Errc::EmptySubcarrierSet, "no subcarriers");
  if (qam_symbols.size() != subcarriers.size())
    fail(Errc::ValidationError, "qam_symbols must have one entry per subcarrier");
  std::set<int> seen;
  for (int k : subcarriers)
    if (!seen.insert(k).second) fail(Errc::ValidationError, "duplicate subcarrier index " + std::to_string(k));
  for (const Complex& x : qam_symbols)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      fail(Errc::ValidationError, "qam symbol is not finite");
  if (symbol_period_s < 0.0 || !std::isfinite(symbol_period_s))
    fail(Errc::ValidationError, "symbol_period_s must be >= 0");
}

int OfdmConfig::max_abs_index() const {
  int m = 0;
  for (int k : subcarriers) m = std::max(m, std::abs(k));
  return m;
}

double OfdmConfig::highest_frequency_hz() const {
  return carrier_hz + static_cast<double>(max_abs_index()) * subcarrier_spacing_hz;
}

Complex OfdmConfig::value_at(double t_s) const {
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < subcarriers.size(); ++i) {
    const double f = carrier_hz + subcarriers[i] * subcarrier_spacing_hz;
    acc += qam_symbols[i] * std::polar(1.0, kTwoPi * f * t_s);
  }
  return acc;
}

std::vector<int> subcarrier_range(int lo, int hi, bool skip_zero) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k)
    if (!(skip_zero && k == 0)) out.push_back(k);
  return out;
}

std::vector<Complex> random_qpsk(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<Complex> out(count);
  for (auto& x : out) {
    const auto bits = rng();
    x = Complex((bits & 1u) ? a : -a, (bits & 2u) ? a : -a);
  }
  return out;
}

OfdmConfig make_ofdm(double carrier_hz, double spacing_hz, std::vector<int> subcarriers,
                     std::vector<Complex> symbols) {
  OfdmConfig cfg;
  cfg.carrier_hz = carrier_hz;
  cfg.subcarrier_spacing_hz = spacing_hz;
  cfg.subcarriers = std::move(subcarriers);
  cfg.qam_symbols = std::move(symbols);
  cfg.validate();
  return cfg;
}

void validate_trajectory(const Trajectory& traj) {
  if (const auto* lin = std::get_if<LinearTrajectory>(&traj)) {
    if (!std::isfinite(lin->d0_m) || !std::isfinite(lin->v_mps))
      fail(Errc::ValidationError, "linear trajectory must be finite");
    return;
  }
  const auto& wp = std::get<WaypointTrajectory>(traj);
  if (wp.points.size() < 2) fail(Errc::ValidationError, "waypoint trajectory needs at least two points");
  for (std::size_t i = 0; i < wp.points.size(); ++i) {
    const auto [t, d] = wp.points[i];
    if (!std::isfinite(t) || !std::isfinite(d)) fail(Errc::ValidationError, "waypoint is not finite");
    if (d < 0.0) fail(Errc::ValidationError, "waypoint distance must be >= 0");
    if (i > 0 && !(t > wp.points[i - 1].first))
      fail(Errc::ValidationError, "waypoint times must be strictly increasing");
  }
}

double trajectory_distance(const Reflector& refl, double t_s) {
  if (const auto* lin = std::get_if<LinearTrajectory>(&refl.trajectory)) {
    const double d = lin->d0_m + lin->v_mps * t_s;
    if (!(d >= 0.0)) fail(Errc::TrajectoryOutOfRange, "negative path distance at t=" + std::to_string(t_s));
    return d;
  }
  const auto& pts = std::get<WaypointTrajectory>(refl.trajectory).points;
  if (pts.empty() || t_s < pts.front().first || t_s > pts.back().first)
    fail(Errc::TrajectoryOutOfRange, "t=" + std::to_string(t_s) + " outside waypoint span");
  auto hi = std::upper_bound(pts.begin(), pts.end(), t_s,
                             [](double t, const auto& p) { return t < p.first; });
  if (hi == pts.end()) return pts.back().second;
  auto lo = hi - 1;
  const double w = (t_s - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

void Scene::validate() const {
  if (!(std::abs(beta) > 0.0)) fail(Errc::ValidationError, "|beta| must be > 0");
  for (const auto& r : reflectors) {
    validate_trajectory(r.trajectory);
    if (!std::isfinite(r.alpha.real()) || !std::isfinite(r.alpha.imag()))
      fail(Errc::ValidationError, "reflector alpha is not finite");
  }
  if (noise_snr_db && !std::isfinite(*noise_snr_db)) fail(Errc::ValidationError, "noise_snr_db is not finite");
}

void SampledSignal::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    fail(Errc::ValidationError, "sample_rate_hz must be > 0");
  for (const auto& x : samples)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) fail(Errc::ValidationError, "non-finite sample");
}

SampledSignal synthesize_symbol(const OfdmConfig& cfg, double sample_rate_hz, double t0_s) {
  if (cfg.subcarriers.empty()) fail(Errc::EmptySubcarrierSet, "no subcarriers");
  cfg.validate();
  const double nyquist = 2.0 * cfg.highest_frequency_hz();
  if (!(sample_rate_hz >= nyquist))
    fail(Errc::SampleRateTooLow,
         "need >= " + std::to_string(nyquist) + " Hz, got " + std::to_string(sample_rate_hz));

  SampledSignal out;
  out.sample_rate_hz = sample_rate_hz;
  out.t0_s = t0_s;
  out.source = std::make_shared<const OfdmConfig>(cfg);
  const auto n = static_cast<std::size_t>(std::llround(cfg.period() * sample_rate_hz));
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = cfg.value_at(out.time_at(i));
  return out;
}

namespace {

Complex interpolate(const SampledSignal& s, double t) {
  const double pos = (t - s.t0_s) * s.sample_rate_hz;
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.samples.size()) return s.samples.back();
  const double w = pos - static_cast<double>(i);
  return s.samples[i] * (1.0 - w) + s.samples[i + 1] * w;
}

}  // namespace

SampledSignal propagate(const SampledSignal& s, const Scene& scene) {
  scene.validate();
  if (scene.reflectors.empty()) fail(Errc::ValidationError, "propagate needs at least one reflector");

  const std::size_t n = s.samples.size();
  std::vector<std::vector<double>> delays(scene.reflectors.size(), std::vector<double>(n));
  std::size_t first_valid = 0;
  for (std::size_t l = 0; l < scene.reflectors.size(); ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = delay_of(trajectory_distance(scene.reflectors[l], s.time_at(i)), scene.path_model);
      delays[l][i] = tau;
      if (!s.source && s.time_at(i) - tau < s.t0_s) first_valid = std::max(first_valid, i + 1);
    }
  }

  SampledSignal out;
  out.sample_rate_hz = s.sample_rate_hz;
  out.source = nullptr;
  if (first_valid >= n) {
    out.t0_s = s.time_at(n);
    return out;
  }
  out.t0_s = s.time_at(first_valid);
  out.samples.assign(n - first_valid, Complex{});

  for (std::size_t l = 0; l < scene.reflectors.size(); ++l) {
    const Complex gain = scene.beta * scene.reflectors[l].alpha;
    for (std::size_t i = first_valid; i < n; ++i) {
      const double t = s.time_at(i) - delays[l][i];
      const Complex v = s.source ? s.source->value_at(t) : interpolate(s, t);
      out.samples[i - first_valid] += gain * v;
    }
  }
  if (scene.noise_snr_db) add_awgn(out.samples, *scene.noise_snr_db, scene.noise_seed);
  return out;
}

void add_awgn(std::span<Complex> x, double snr_db, std::uint64_t seed) {
  if (x.empty()) return;
  double power = 0.0;
  for (const auto& v : x) power += std::norm(v);
  power /= static_cast<double>(x.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0) / 2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : x) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += Complex(sigma * re, sigma * im);
  }
}

}  // namespace ambient
