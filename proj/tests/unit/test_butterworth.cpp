#include <cmath>
#include <functional>

#include "ambient/butterworth.hpp"
#include "ambient/error.hpp"
#include "doctest.h"

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

// Steady-state amplitude ratio over the last quarter of the output.
double gain_at(double f, double fs, int order, double cutoff) {
  const std::size_t n = static_cast<std::size_t>(fs * 2.0);
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::polar(1.0, kTwoPi * f * static_cast<double>(i) / fs);
  const auto y = butterworth_lowpass(x, fs, order, cutoff);
  double peak = 0.0;
  for (std::size_t i = 3 * n / 4; i < n; ++i) peak = std::max(peak, std::abs(y[i]));
  return peak;
}

}  // namespace

TEST_CASE("unity DC gain") {
  std::vector<Complex> x(20000, Complex(0.4, -1.1));
  const auto y = butterworth_lowpass(x, 20e3, 4, 200.0);
  CHECK(std::abs(y.back() - x.back()) < 1e-6);
}

TEST_CASE("steady start removes the start-up transient") {
  std::vector<Complex> x(1000, Complex(0.4, -1.1));
  for (int order : {1, 2, 3, 4, 5}) {
    const auto y = butterworth_lowpass(x, 2e6, order, 200.0, true);
    for (auto v : y) CHECK(std::abs(v - x[0]) < 1e-9);
  }
}

TEST_CASE("half-power point at the cutoff") {
  CHECK(gain_at(200.0, 20e3, 4, 200.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
  for (const auto& b : butterworth_design(4, 200.0, 20e3)) (void)b;
  double g = 1.0;
  for (const auto& b : butterworth_design(5, 300.0, 8e3)) g *= b.magnitude(300.0, 8e3);
  CHECK(g == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("order 4 attenuates ten times the cutoff by at least 75 dB") {
  CHECK(20.0 * std::log10(gain_at(2000.0, 20e3, 4, 200.0)) <= -75.0);
}

TEST_CASE("odd orders end with a first-order section") {
  const auto sos = butterworth_design(3, 100.0, 1e4);
  REQUIRE(sos.size() == 2);
  CHECK(sos.back().b2 == 0.0);
  CHECK(sos.back().a2 == 0.0);
  CHECK(butterworth_design(4, 100.0, 1e4).size() == 2);
}

TEST_CASE("real and imaginary parts are filtered independently") {
  std::vector<Complex> x(500), re(500), im(500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = Complex(std::sin(0.01 * i), std::cos(0.3 * i));
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  const auto y = butterworth_lowpass(x, 1e3, 4, 50.0);
  const auto yr = butterworth_lowpass(re, 1e3, 4, 50.0), yi = butterworth_lowpass(im, 1e3, 4, 50.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y[i].real() == yr[i].real());
    CHECK(y[i].imag() == yi[i].real());
  }
}

TEST_CASE("parameter errors") {
  std::vector<Complex> x(10);
  CHECK(code_of([&] { butterworth_lowpass(x, 1e3, 4, 500.0); }) == Errc::CutoffAboveNyquist);
  CHECK(code_of([&] { butterworth_lowpass(x, 1e3, 0, 100.0); }) == Errc::OrderZero);
}
