#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "ambient/mixer_doppler.hpp"
#include "ambient/types.hpp"

namespace ambient {

// Which direction vector the steering weights use.
//
//  Printed:   u = (cos t cos p, cos t sin p, sin p), exactly as the model
//             writes it. |u|^2 = cos^2 t + sin^2 p, and azimuth only enters
//             through cos t, so +t and -t are indistinguishable.
//  Spherical: u = (cos p cos t, cos p sin t, sin p), the unit vector for
//             azimuth t and elevation p.
enum class DirectionModel { Printed, Spherical };

Vec3 direction_vector(double theta_rad, double phi_rad, DirectionModel model = DirectionModel::Printed);

// TX sits at the origin; RX positions in metres.
struct ArrayGeometry {
  std::vector<Vec3> rx_positions;
  double wavelength_m = 1.0;

  void validate() const;
};

// Eight receivers on the perimeter of a 3x3 lattice in the y-z plane
// (boresight +x), `spacing_m` apart, TX at the centre.
ArrayGeometry ring_array(double wavelength_m, double spacing_m);

struct DirectionGrid {
  std::vector<double> theta_values;  // ascending, radians
  std::vector<double> phi_values;    // ascending, radians
  DirectionModel model = DirectionModel::Printed;

  std::size_t cells() const { return theta_values.size() * phi_values.size(); }
  void validate() const;
};

// n points from lo to hi inclusive (radians).
DirectionGrid uniform_grid(double theta_lo, double theta_hi, std::size_t n_theta, double phi_lo, double phi_hi,
                           std::size_t n_phi, DirectionModel model);

struct HeatmapFrame {
  double t_s = 0.0;
  std::size_t n_theta = 0;
  std::size_t n_phi = 0;
  std::vector<double> values;  // |I|, row-major [phi][theta]

  double at(std::size_t phi_idx, std::size_t theta_idx) const { return values[phi_idx * n_theta + theta_idx]; }
  double peak() const;
  std::pair<std::size_t, std::size_t> argmax() const;  // (phi_idx, theta_idx)
};

// w_i = exp(-j 2pi/lambda <u(theta, phi), p_i>).
Complex steering_weight(const Vec3& p, double theta_rad, double phi_rad, double lambda_m,
                        DirectionModel model = DirectionModel::Printed);

// Precomputed w_i for every grid cell, laid out [cell][antenna].
class SteeringTable {
 public:
  SteeringTable(const ArrayGeometry& geom, const DirectionGrid& grid);

  std::size_t antennas() const { return antennas_; }
  std::size_t cells() const { return weights_.size() / std::max<std::size_t>(antennas_, 1); }
  const Complex* cell(std::size_t c) const { return weights_.data() + c * antennas_; }

 private:
  std::size_t antennas_;
  std::vector<Complex> weights_;
};

// |sum_i w_i(theta, phi) conj(delta_i)| over the grid, for per-antenna
// differences delta_i = z_i(t) - z_i(t - T).
//  Exec::Serial   recomputes every steering weight, one cell after another
//  Exec::Parallel SteeringTable lookups, OpenMP over cells
HeatmapFrame beamform_differences(std::span<const Complex> deltas, const ArrayGeometry& geom,
                                  const DirectionGrid& grid, Exec exec = Exec::Parallel,
                                  const SteeringTable* table = nullptr);

// I(theta, phi, t) = sum_i w_i conj(z_i(t) - z_i(t - T_delta)); the frame
// holds |I|. Times map to the nearest sample.
HeatmapFrame differential_beamform(const BasebandStream& streams, const ArrayGeometry& geom,
                                   const DirectionGrid& grid, double t_s, double t_delta_s,
                                   Exec exec = Exec::Parallel);

// One frame per period: frame k uses the last sample of period k as "now"
// and the sample T_delta earlier as reference, clamped to the first sample
// for leading frames. Frame count is floor(span * rate), span = N / fs.
std::vector<HeatmapFrame> heatmap_sequence(const BasebandStream& streams, const ArrayGeometry& geom,
                                           const DirectionGrid& grid, double frame_period_s, double t_delta_s,
                                           Exec exec = Exec::Parallel);

}  // namespace ambient
