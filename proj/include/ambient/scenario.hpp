#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ambient/beamformer.hpp"
#include "ambient/sanitizer.hpp"
#include "ambient/signal_model.hpp"
#include "json.hpp"

namespace ambient {

struct OfdmSpec {
  double carrier_hz = 2.35e9;
  double subcarrier_spacing_hz = 30e3;
  int subcarrier_min = -666;
  int subcarrier_max = 666;
  bool skip_dc = true;
  std::uint64_t symbol_seed = 1;

  OfdmConfig build() const;
};

// Receiver front-end effects applied by `simulate` on top of the analytic
// baseband.
struct Impairments {
  Complex dc_offset{};
  double gate_period_s = 0.0;     // 0 disables gating
  double gate_on_fraction = 1.0;  // fraction of each period the reflected signal is present
  bool round_robin = false;       // one ADC switched across channels, sample-and-hold
};

struct ArraySpec {
  std::string layout = "ring";        // "ring" or "custom"
  std::optional<double> spacing_m;    // ring only; default lambda / 2
  std::vector<Vec3> rx_positions;     // custom only; ring fills it on load
  std::size_t channels = 8;
};

struct BeamformSpec {
  double theta_min_deg = -60.0;
  double theta_max_deg = 60.0;
  std::size_t n_theta = 100;
  double phi_min_deg = -60.0;
  double phi_max_deg = 60.0;
  std::size_t n_phi = 100;
  DirectionModel direction_model = DirectionModel::Spherical;
  double frame_rate_hz = 5.25;
  std::optional<double> t_delta_s;  // default one frame period
  // Low-pass each channel with the sanitizer's Butterworth (steady start)
  // before differencing.
  bool prefilter = true;

  double frame_period_s() const { return 1.0 / frame_rate_hz; }
  double lag_s() const { return t_delta_s.value_or(frame_period_s()); }
};

struct DopplerSpec {
  // Lag over the sanitized sequence, a multiple of sanitize.window_s.
  double t_delta_s = 0.01;
  std::size_t channel = 0;
};

struct RunSpec {
  double duration_s = 4.0;
  double sample_rate_hz = 2e6;
  double t0_s = 0.0;
  std::uint64_t rng_seed = 1;
};

struct Scenario {
  std::string name = "custom";
  OfdmSpec ofdm;
  Scene scene;  // reflector angles stored in radians
  Impairments impairments;
  ArraySpec array;
  SanitizeConfig sanitize;
  BeamformSpec beamform;
  DopplerSpec doppler;
  RunSpec run;

  OfdmConfig ofdm_config() const { return ofdm.build(); }
  ArrayGeometry geometry() const;
  DirectionGrid grid() const;
  std::size_t sample_count() const;
  DopplerConfig doppler_config() const;

  // Fills derived defaults (ring positions, spacing) and checks cross-block
  // consistency. Throws ValidationError("field: reason").
  void finalize();
};

// Strict schema: unknown keys are rejected, every key has a default.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);

// Parses text, applies AMBIENT_* overrides from `env`, validates.
// ParseError messages carry "line N".
Scenario parse_scenario(const std::string& text, const std::map<std::string, std::string>& env = {});

// `path_or_preset` is a file path, or a bundled preset name when no such
// file exists. Environment overrides come from the process environment.
Scenario load_scenario(const std::string& path_or_preset);

// AMBIENT_RUN__DURATION_S=2.5 sets run.duration_s; "__" separates levels,
// numeric segments index arrays. Values parse as JSON, else as strings.
void apply_env_overrides(nlohmann::json& j, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_env_overrides();

std::vector<std::string> preset_names();
Scenario preset(const std::string& name);

}  // namespace ambient
