#include "oracles/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace synth {

Window constellation_window(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const double pi = std::acos(-1.0);

  const Complex stat = std::polar(0.1 * u(rng), 2.0 * pi * u(rng));
  const double radius = 0.8 + 0.4 * u(rng);
  const double psi = 2.0 * pi * u(rng);
  const double half_arc = 0.15;

  const std::size_t n_out = n / 10;
  const std::size_t n_static = (n - n_out) * 3 / 10;
  const std::size_t n_move = n - n_out - n_static;

  Window w;
  for (std::size_t i = 0; i < n_static; ++i) w.points.push_back(stat + 0.01 * Complex(g(rng), g(rng)));
  for (std::size_t i = 0; i < n_move; ++i) {
    const double a = psi + half_arc * (2.0 * u(rng) - 1.0);
    w.points.push_back(stat + std::polar(radius, a) + 0.01 * Complex(g(rng), g(rng)));
  }
  for (std::size_t i = 0; i < n_out; ++i) w.points.push_back(Complex(3.0 * u(rng) - 1.5, 3.0 * u(rng) - 1.5));
  std::shuffle(w.points.begin(), w.points.end(), rng);

  w.truth = std::polar(radius * std::sin(half_arc) / half_arc, psi);
  w.scale = std::abs(w.truth);
  return w;
}

std::vector<Complex> planted_deltas(const ambient::ArrayGeometry& geom, double theta, double phi, double snr_db,
                                    std::uint64_t seed, ambient::DirectionModel model) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const Complex gain = std::polar(1.0, 2.0 * std::acos(-1.0) * u(rng));
  const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
  std::vector<Complex> d;
  for (const auto& p : geom.rx_positions) {
    const Complex w = ambient::steering_weight(p, theta, phi, geom.wavelength_m, model);
    d.push_back(w * gain + sigma * Complex(g(rng), g(rng)));
  }
  return d;
}

}  // namespace synth
