#include <cmath>
#include <functional>
#include <random>

#include "ambient/beamformer.hpp"
#include "ambient/error.hpp"
#include "doctest.h"
#include "oracles/naive.hpp"
#include "oracles/synthetic.hpp"

using namespace ambient;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no ambient::Error thrown");
  return Errc::InvalidArgument;
}

const double kLambda = kSpeedOfLight / 2.35e9;
const double kLim = kPi / 3.0;

BasebandStream stream_for(const ArrayGeometry& geom, double theta, double phi, std::size_t n, double v) {
  // Each antenna sees a reflector whose path grows at v m/s, shifted by the
  // direction-dependent offset <u, p_i>.
  BasebandStream s;
  s.sample_rate_hz = 100.0;
  const auto u = direction_vector(theta, phi, DirectionModel::Spherical);
  for (const auto& p : geom.rx_positions) {
    std::vector<Complex> ch;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = 3.0 + v * static_cast<double>(i) / s.sample_rate_hz + dot(u, p);
      ch.push_back(std::polar(1.0, -kTwoPi * d / geom.wavelength_m) + Complex(0.5, 0.2));
    }
    s.channels.push_back(ch);
  }
  return s;
}

}  // namespace

TEST_CASE("direction vectors") {
  const auto b = direction_vector(0.0, 0.0, DirectionModel::Spherical);
  CHECK(b == Vec3{1.0, 0.0, 0.0});
  for (double t : {-1.0, -0.3, 0.0, 0.4, 1.0})
    for (double p : {-1.0, 0.0, 0.7}) CHECK(direction_vector(t, p, DirectionModel::Spherical).norm() == doctest::Approx(1.0));
  // The printed form cannot tell +theta from -theta.
  CHECK(direction_vector(0.5, 0.2, DirectionModel::Printed) == direction_vector(-0.5, 0.2, DirectionModel::Printed));
}

TEST_CASE("boresight weights are all one for an array in the y-z plane") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  REQUIRE(geom.rx_positions.size() == 8);
  for (const auto& p : geom.rx_positions) {
    CHECK(p.x == 0.0);
    CHECK(std::abs(steering_weight(p, 0.0, 0.0, kLambda, DirectionModel::Spherical) - Complex(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("steering weights have unit modulus") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  for (const auto& p : geom.rx_positions)
    for (double t : {-1.0, 0.3})
      for (double ph : {-0.5, 0.9}) CHECK(std::abs(steering_weight(p, t, ph, kLambda)) == doctest::Approx(1.0));
}

TEST_CASE("a single antenna gives a flat heatmap") {
  ArrayGeometry one;
  one.wavelength_m = kLambda;
  one.rx_positions = {{0.0, 0.1, 0.0}};
  const auto grid = uniform_grid(-kLim, kLim, 7, -kLim, kLim, 5, DirectionModel::Spherical);
  const std::vector<Complex> d = {Complex(0.3, -0.4)};
  const auto f = beamform_differences(d, one, grid, Exec::Serial);
  for (double v : f.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("zero differences give a zero heatmap") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 20, -kLim, kLim, 10, DirectionModel::Spherical);
  const std::vector<Complex> d(8);
  for (double v : beamform_differences(d, geom, grid).values) CHECK(v == 0.0);
}

TEST_CASE("serial, parallel and the hand-written sum agree") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 31, -kLim, kLim, 17, DirectionModel::Spherical);
  const SteeringTable table(geom, grid);
  std::vector<std::array<double, 3>> pos;
  for (const auto& p : geom.rx_positions) pos.push_back({p.x, p.y, p.z});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = synth::planted_deltas(geom, 0.3, -0.2, 5.0, seed);
    const auto serial = beamform_differences(d, geom, grid, Exec::Serial);
    const auto parallel = beamform_differences(d, geom, grid, Exec::Parallel, &table);
    const auto untabled = beamform_differences(d, geom, grid, Exec::Parallel);
    for (std::size_t pi = 0; pi < grid.phi_values.size(); ++pi)
      for (std::size_t ti = 0; ti < grid.theta_values.size(); ++ti) {
        const double ref = oracle::beam_power(d, pos, kLambda, grid.theta_values[ti], grid.phi_values[pi]);
        CHECK(serial.at(pi, ti) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(parallel.at(pi, ti) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(untabled.at(pi, ti) == doctest::Approx(ref).epsilon(1e-12));
      }
  }
}

TEST_CASE("noise-free planted direction is recovered") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 100, -kLim, kLim, 100, DirectionModel::Spherical);
  const double step = 2.0 * kLim / 99.0;
  for (auto [ti, pi] : {std::pair{20, 70}, std::pair{50, 50}, std::pair{85, 10}}) {
    const auto d = synth::planted_deltas(geom, -kLim + ti * step, -kLim + pi * step, 200.0, 1);
    const auto [gp, gt] = beamform_differences(d, geom, grid).argmax();
    CHECK(gt == static_cast<std::size_t>(ti));
    CHECK(gp == static_cast<std::size_t>(pi));
  }
}

TEST_CASE("a mover on the positive-theta side puts the heatmap mass there") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 40, -kLim, kLim, 40, DirectionModel::Spherical);
  const auto s = stream_for(geom, 0.6, 0.0, 100, 0.8);
  const auto f = differential_beamform(s, geom, grid, 0.5, 0.1);
  double left = 0.0, right = 0.0;
  for (std::size_t pi = 0; pi < 40; ++pi)
    for (std::size_t ti = 0; ti < 40; ++ti) (ti < 20 ? left : right) += f.at(pi, ti);
  CHECK(right > left);
}

TEST_CASE("a static stream gives an all-zero differential heatmap") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 20, -kLim, kLim, 20, DirectionModel::Spherical);
  const auto s = stream_for(geom, 0.6, 0.1, 100, 0.0);
  for (double v : differential_beamform(s, geom, grid, 0.5, 0.1).values) CHECK(v == 0.0);
}

TEST_CASE("heatmap sequence cadence") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 10, -kLim, kLim, 10, DirectionModel::Spherical);
  const auto s = stream_for(geom, 0.2, 0.1, 400, 0.8);  // 4 s at 100 Hz
  const auto frames = heatmap_sequence(s, geom, grid, 1.0 / 5.25, 1.0 / 5.25);
  CHECK(frames.size() == 21);
  for (std::size_t k = 1; k < frames.size(); ++k) CHECK(frames[k].t_s > frames[k - 1].t_s);
  const auto serial = heatmap_sequence(s, geom, grid, 1.0 / 5.25, 1.0 / 5.25, Exec::Serial);
  for (std::size_t k = 0; k < frames.size(); ++k)
    for (std::size_t c = 0; c < frames[k].values.size(); ++c)
      CHECK(frames[k].values[c] == doctest::Approx(serial[k].values[c]).epsilon(1e-12));
}

TEST_CASE("beamformer errors") {
  const auto geom = ring_array(kLambda, kLambda / 2.0);
  const auto grid = uniform_grid(-kLim, kLim, 10, -kLim, kLim, 10, DirectionModel::Spherical);
  auto s = stream_for(geom, 0.2, 0.1, 100, 0.8);
  CHECK(code_of([&] { differential_beamform(s, geom, grid, 5.0, 0.1); }) == Errc::TimestampOutOfRange);
  s.channels.pop_back();
  CHECK(code_of([&] { differential_beamform(s, geom, grid, 0.5, 0.1); }) == Errc::ChannelGeometryMismatch);
  const std::vector<Complex> three(3);
  CHECK(code_of([&] { beamform_differences(three, geom, grid); }) == Errc::ChannelGeometryMismatch);
  DirectionGrid bad = grid;
  std::swap(bad.theta_values[0], bad.theta_values[1]);
  CHECK_THROWS_AS(bad.validate(), Error);
  ArrayGeometry tiny;
  tiny.wavelength_m = 0.0;
  tiny.rx_positions = {{0, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(tiny.validate(), Error);
}
