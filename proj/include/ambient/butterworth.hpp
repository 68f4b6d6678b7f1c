#pragma once

#include <span>
#include <vector>

#include "ambient/types.hpp"

namespace ambient {

// Normalized second-order section: y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  // |H(e^{j 2pi f / fs})|
  double magnitude(double f_hz, double fs_hz) const;
};

// Digital Butterworth low-pass: analog prototype poles, bilinear transform
// with the cutoff prewarped. Odd orders end with a first-order section
// (b2 = a2 = 0).
std::vector<Biquad> butterworth_design(int order, double cutoff_hz, double sample_rate_hz);

// Causal, transposed direct form II. Real coefficients, so the real and
// imaginary parts are filtered independently. The state starts at zero, or
// with `steady_start` at the steady state for a constant input equal to x[0]
// (no start-up transient).
std::vector<Complex> butterworth_lowpass(std::span<const Complex> x, double sample_rate_hz, int order,
                                         double cutoff_hz, bool steady_start = false);

}  // namespace ambient
