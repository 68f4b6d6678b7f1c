#include "ambient/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "ambient/error.hpp"

namespace ambient {

Vec3 direction_vector(double theta_rad, double phi_rad, DirectionModel model) {
  const double ct = std::cos(theta_rad), st = std::sin(theta_rad);
  const double cp = std::cos(phi_rad), sp = std::sin(phi_rad);
  if (model == DirectionModel::Printed) return {ct * cp, ct * sp, sp};
  return {cp * ct, cp * st, sp};
}

void ArrayGeometry::validate() const {
  if (rx_positions.size() < 2) fail(Errc::ValidationError, "need at least two RX antennas");
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) fail(Errc::ValidationError, "wavelength must be > 0");
  for (const auto& p : rx_positions)
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      fail(Errc::ValidationError, "antenna position is not finite");
}

ArrayGeometry ring_array(double wavelength_m, double spacing_m) {
  ArrayGeometry g;
  g.wavelength_m = wavelength_m;
  for (int row = 1; row >= -1; --row)
    for (int col = -1; col <= 1; ++col)
      if (row != 0 || col != 0) g.rx_positions.push_back({0.0, col * spacing_m, row * spacing_m});
  return g;
}

namespace {

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.empty()) fail(Errc::ValidationError, std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) fail(Errc::ValidationError, std::string(name) + " value is not finite");
    if (i > 0 && !(v[i] > v[i - 1])) fail(Errc::ValidationError, std::string(name) + " must be strictly ascending");
  }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace

void DirectionGrid::validate() const {
  check_axis(theta_values, "theta");
  check_axis(phi_values, "phi");
}

DirectionGrid uniform_grid(double theta_lo, double theta_hi, std::size_t n_theta, double phi_lo, double phi_hi,
                           std::size_t n_phi, DirectionModel model) {
  DirectionGrid g;
  g.theta_values = linspace(theta_lo, theta_hi, n_theta);
  g.phi_values = linspace(phi_lo, phi_hi, n_phi);
  g.model = model;
  g.validate();
  return g;
}

double HeatmapFrame::peak() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

std::pair<std::size_t, std::size_t> HeatmapFrame::argmax() const {
  const auto it = std::max_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(it - values.begin());
  return {idx / n_theta, idx % n_theta};
}

Complex steering_weight(const Vec3& p, double theta_rad, double phi_rad, double lambda_m, DirectionModel model) {
  const double phase = -kTwoPi / lambda_m * dot(direction_vector(theta_rad, phi_rad, model), p);
  return std::polar(1.0, phase);
}

SteeringTable::SteeringTable(const ArrayGeometry& geom, const DirectionGrid& grid)
    : antennas_(geom.rx_positions.size()), weights_(grid.cells() * geom.rx_positions.size()) {
  const std::size_t n_theta = grid.theta_values.size();
  const auto cells = static_cast<std::ptrdiff_t>(grid.cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < cells; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const double phi = grid.phi_values[cu / n_theta];
    const double theta = grid.theta_values[cu % n_theta];
    for (std::size_t i = 0; i < antennas_; ++i)
      weights_[cu * antennas_ + i] = steering_weight(geom.rx_positions[i], theta, phi, geom.wavelength_m, grid.model);
  }
}

HeatmapFrame beamform_differences(std::span<const Complex> deltas, const ArrayGeometry& geom,
                                  const DirectionGrid& grid, Exec exec, const SteeringTable* table) {
  if (deltas.size() != geom.rx_positions.size())
    fail(Errc::ChannelGeometryMismatch, std::to_string(deltas.size()) + " channels for " +
                                            std::to_string(geom.rx_positions.size()) + " antennas");
  HeatmapFrame frame;
  frame.n_theta = grid.theta_values.size();
  frame.n_phi = grid.phi_values.size();
  frame.values.assign(grid.cells(), 0.0);
  const std::size_t m = deltas.size();

  if (exec == Exec::Serial) {
    for (std::size_t pi = 0; pi < frame.n_phi; ++pi) {
      for (std::size_t ti = 0; ti < frame.n_theta; ++ti) {
        Complex acc{};
        for (std::size_t i = 0; i < m; ++i)
          acc += steering_weight(geom.rx_positions[i], grid.theta_values[ti], grid.phi_values[pi], geom.wavelength_m,
                                 grid.model) *
                 std::conj(deltas[i]);
        frame.values[pi * frame.n_theta + ti] = std::abs(acc);
      }
    }
    return frame;
  }

  std::optional<SteeringTable> own;
  if (!table) table = &own.emplace(geom, grid);
  std::vector<Complex> conj_delta(m);
  for (std::size_t i = 0; i < m; ++i) conj_delta[i] = std::conj(deltas[i]);

  const auto cells = static_cast<std::ptrdiff_t>(grid.cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < cells; ++c) {
    const Complex* w = table->cell(static_cast<std::size_t>(c));
    Complex acc{};
    for (std::size_t i = 0; i < m; ++i) acc += w[i] * conj_delta[i];
    frame.values[static_cast<std::size_t>(c)] = std::abs(acc);
  }
  return frame;
}

namespace {

void check_streams(const BasebandStream& streams, const ArrayGeometry& geom, const DirectionGrid& grid) {
  streams.validate();
  geom.validate();
  grid.validate();
  if (streams.channel_count() != geom.rx_positions.size())
    fail(Errc::ChannelGeometryMismatch, std::to_string(streams.channel_count()) + " channels for " +
                                            std::to_string(geom.rx_positions.size()) + " antennas");
}

std::vector<Complex> deltas_at(const BasebandStream& streams, std::size_t now, std::size_t ref) {
  std::vector<Complex> d(streams.channel_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = streams.channels[i][now] - streams.channels[i][ref];
  return d;
}

}  // namespace

HeatmapFrame differential_beamform(const BasebandStream& streams, const ArrayGeometry& geom,
                                   const DirectionGrid& grid, double t_s, double t_delta_s, Exec exec) {
  check_streams(streams, geom, grid);
  const auto n = static_cast<long long>(streams.length());
  const long long now = std::llround((t_s - streams.t0_s) * streams.sample_rate_hz);
  const long long ref = std::llround((t_s - t_delta_s - streams.t0_s) * streams.sample_rate_hz);
  if (now < 0 || now >= n) fail(Errc::TimestampOutOfRange, "t=" + std::to_string(t_s) + " outside stream");
  if (ref < 0 || ref >= n)
    fail(Errc::TimestampOutOfRange, "t-T_delta=" + std::to_string(t_s - t_delta_s) + " outside stream");

  auto frame = beamform_differences(deltas_at(streams, static_cast<std::size_t>(now), static_cast<std::size_t>(ref)),
                                    geom, grid, exec);
  frame.t_s = streams.time_at(static_cast<std::size_t>(now));
  return frame;
}

std::vector<HeatmapFrame> heatmap_sequence(const BasebandStream& streams, const ArrayGeometry& geom,
                                           const DirectionGrid& grid, double frame_period_s, double t_delta_s,
                                           Exec exec) {
  if (!(frame_period_s > 0.0)) fail(Errc::InvalidArgument, "frame_period_s must be > 0");
  if (!(t_delta_s >= 0.0)) fail(Errc::InvalidArgument, "t_delta_s must be >= 0");
  std::vector<HeatmapFrame> frames;
  if (streams.length() == 0) return frames;
  check_streams(streams, geom, grid);

  const auto n = static_cast<long long>(streams.length());
  const double fs = streams.sample_rate_hz;
  const double span = static_cast<double>(n) / fs;
  const auto count = static_cast<long long>(std::floor(span / frame_period_s + 1e-9));
  const long long lag = std::llround(t_delta_s * fs);

  const SteeringTable table(geom, grid);
  for (long long k = 0; k < count; ++k) {
    const long long now = std::clamp(std::llround(static_cast<double>(k + 1) * frame_period_s * fs) - 1, 0LL, n - 1);
    const long long ref = std::max(now - lag, 0LL);
    auto frame = beamform_differences(deltas_at(streams, static_cast<std::size_t>(now), static_cast<std::size_t>(ref)),
                                      geom, grid, exec, exec == Exec::Parallel ? &table : nullptr);
    frame.t_s = streams.time_at(static_cast<std::size_t>(now));
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace ambient
