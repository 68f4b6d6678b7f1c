#include "ambient/butterworth.hpp"

#include <cmath>
#include <string>

#include "ambient/error.hpp"

namespace ambient {

double Biquad::magnitude(double f_hz, double fs_hz) const {
  const Complex z1 = std::polar(1.0, -kTwoPi * f_hz / fs_hz);
  const Complex z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

std::vector<Biquad> butterworth_design(int order, double cutoff_hz, double sample_rate_hz) {
  if (order <= 0) fail(Errc::OrderZero, "butterworth order must be >= 1");
  if (!(cutoff_hz > 0.0)) fail(Errc::InvalidArgument, "cutoff must be > 0");
  if (!(cutoff_hz < sample_rate_hz / 2.0))
    fail(Errc::CutoffAboveNyquist, std::to_string(cutoff_hz) + " Hz >= fs/2");

  const double k = 2.0 * sample_rate_hz;
  const double wc = k * std::tan(kPi * cutoff_hz / sample_rate_hz);
  std::vector<Biquad> sections;

  for (int i = 0; i < order / 2; ++i) {
    // Left-half-plane pole pair of the analog prototype at radius wc.
    const double angle = kPi * (2.0 * i + order + 1.0) / (2.0 * order);
    const double c1 = -2.0 * wc * std::cos(angle);  // s^1 coefficient
    const double c0 = wc * wc;
    const double d0 = k * k + c1 * k + c0;
    Biquad s;
    s.b0 = c0 / d0;
    s.b1 = 2.0 * c0 / d0;
    s.b2 = c0 / d0;
    s.a1 = (2.0 * c0 - 2.0 * k * k) / d0;
    s.a2 = (k * k - c1 * k + c0) / d0;
    sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double d0 = k + wc;
    Biquad s;
    s.b0 = wc / d0;
    s.b1 = wc / d0;
    s.b2 = 0.0;
    s.a1 = (wc - k) / d0;
    s.a2 = 0.0;
    sections.push_back(s);
  }
  return sections;
}

std::vector<Complex> butterworth_lowpass(std::span<const Complex> x, double sample_rate_hz, int order,
                                         double cutoff_hz, bool steady_start) {
  const auto sections = butterworth_design(order, cutoff_hz, sample_rate_hz);
  std::vector<Complex> y(x.begin(), x.end());
  for (const auto& s : sections) {
    Complex w1{}, w2{};
    if (steady_start && !y.empty()) {
      // Unit DC gain per section: output equals the constant input.
      const Complex x0 = y.front();
      w2 = (s.b2 - s.a2) * x0;
      w1 = (s.b1 - s.a1) * x0 + w2;
    }
    for (auto& v : y) {
      const Complex in = v;
      const Complex out = s.b0 * in + w1;
      w1 = s.b1 * in - s.a1 * out + w2;
      w2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

}  // namespace ambient
