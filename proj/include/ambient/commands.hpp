#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ambient/io.hpp"
#include "ambient/scenario.hpp"

namespace ambient {

// One receive channel as the simulator emits it: analytic baseband with the
// per-antenna path offset <u(theta, phi), p_i>, then gating, DC offset,
// noise and optional round-robin sample-and-hold.
std::vector<Complex> simulate_channel(const Scenario& sc, const OfdmConfig& cfg, std::size_t channel,
                                      Exec exec = Exec::Parallel);
BasebandStream simulate_stream(const Scenario& sc, Exec exec = Exec::Parallel);

// Writes baseband/ch*.cf32, baseband/header.json, scenario.json, manifest.json.
void run_simulate(const Scenario& sc, const fs::path& out, std::ostream& log);

struct OracleOptions {
  double amplitude_tol = 1e-3;  // relative
  double phase_tol = 1e-2;      // rad
  // Scales beta on the analytic side only; anything but 1 is a planted fault.
  double analytic_beta_scale = 1.0;
};

struct OracleReport {
  std::size_t symbols = 0;
  std::size_t samples = 0;
  double max_amplitude_rel_err = 0.0;
  double max_phase_err_rad = 0.0;
  double runtime_s = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

// Per OFDM symbol (fresh QPSK each time): synthesize -> propagate -> self_mix
// -> brick-wall low-pass at f_delta / 2, compared sample by sample with
// analytic_baseband.
OracleReport run_oracle(const Scenario& sc, const OracleOptions& opt = {});

std::vector<SanitizedRow> sanitize_baseband(const BasebandStream& stream, const SanitizeConfig& cfg,
                                            std::vector<std::vector<SanitizedPoint>>* points = nullptr);

// Phase-rate velocity over the sanitized sequence of one channel. Empty
// windows hold the previous value; leading empty windows are dropped.
VelocityTrace velocity_from_points(const std::vector<SanitizedPoint>& pts, const Scenario& sc);
VelocityTrace velocity_from_rows(std::span<const SanitizedRow> rows, const Scenario& sc);

std::vector<HeatmapFrame> beamform_stream(const BasebandStream& stream, const Scenario& sc,
                                          Exec exec = Exec::Parallel);

// Each stage reads what an earlier stage wrote to `in` and writes into `out`
// (which may be the same directory).
void run_sanitize(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log);
void run_velocity(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log);
void run_beamform(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log);

// Simulates into `out` unless `in` already holds a baseband directory, then
// sanitize, velocity and beamform.
void run_pipeline(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log);

enum class MetricTask { Mask, Keypoint };

// Prints the summary table and writes <out>/metrics.json.
nlohmann::json run_metrics(const fs::path& pred, const fs::path& gt, MetricTask task, const fs::path& out,
                           std::ostream& log);

}  // namespace ambient
