#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ambient/beamformer.hpp"
#include "ambient/eval_metrics.hpp"
#include "ambient/mixer_doppler.hpp"
#include "ambient/sanitizer.hpp"
#include "json.hpp"

namespace ambient {

namespace fs = std::filesystem;

// Writes to a sibling temp file, then renames over `path`. Parent
// directories are created. IoError carries the path.
void write_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

// Lossless text form of a double ("%.17g").
std::string format_double(double v);

inline constexpr int kBasebandFormatVersion = 1;
inline constexpr const char* kBasebandLayout = "cf32le-interleaved";

struct BasebandHeader {
  int format_version = kBasebandFormatVersion;
  std::size_t channels = 0;
  double sample_rate_hz = 1.0;
  double t0_s = 0.0;
  std::size_t sample_count = 0;
  std::string layout = kBasebandLayout;
  std::string geometry_ref;

  nlohmann::json to_json() const;
  static BasebandHeader from_json(const nlohmann::json& j);
  friend bool operator==(const BasebandHeader&, const BasebandHeader&) = default;
};

// <dir>/baseband/header.json and <dir>/baseband/ch<i>.cf32.
fs::path baseband_dir(const fs::path& dir);
fs::path channel_path(const fs::path& dir, std::size_t channel);

// Raw float32 little-endian I/Q pairs.
std::string encode_cf32(std::span<const Complex> samples);
std::vector<Complex> decode_cf32(std::string_view bytes, const std::string& context);

void write_baseband_header(const fs::path& dir, const BasebandHeader& h);
BasebandHeader read_baseband_header(const fs::path& dir);
void write_channel(const fs::path& dir, std::size_t channel, std::span<const Complex> samples);
std::vector<Complex> read_channel(const fs::path& dir, const BasebandHeader& h, std::size_t channel);

void write_baseband(const fs::path& dir, const BasebandStream& stream);
BasebandStream read_baseband(const fs::path& dir);

// t_s,re,im,channel. Invalid (empty) windows are not written.
struct SanitizedRow {
  double t_s = 0.0;
  Complex value{};
  std::size_t channel = 0;
  friend bool operator==(const SanitizedRow&, const SanitizedRow&) = default;
};
std::string sanitized_csv(std::span<const SanitizedRow> rows);
std::vector<SanitizedRow> parse_sanitized_csv(const std::string& text);

// t_s,phase_rate_rad_s,velocity_mps
std::string velocity_csv(const VelocityTrace& v);
VelocityTrace parse_velocity_csv(const std::string& text);

// Raw |I| values, one row per phi, one column per theta.
std::string heatmap_csv(const HeatmapFrame& f);
HeatmapFrame parse_heatmap_csv(const std::string& text);

// 16-bit big-endian binary PGM, values scaled by 65535 / scale. Returns the
// scale used (peak, or 1 for an all-zero frame).
struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> pixels;
};
std::string encode_pgm(const HeatmapFrame& f, double* scale_out);
PgmImage decode_pgm(std::string_view bytes);

// Metric inputs.
//   mask:          instance,row,col,value   (dense raster per instance)
//   keypoint gt:   instance,keypoint,x,y,visibility,bbox_w,bbox_h
//   keypoint pred: instance,keypoint,x,y
// SchemaError names the offending line and column.
std::vector<std::pair<long long, Mask>> parse_mask_csv(const std::string& text);

struct KeypointTable {
  struct Row {
    long long instance = 0;
    std::size_t keypoint = 0;
    double x = 0.0;
    double y = 0.0;
    int visibility = 0;
    double bbox_w = 0.0;
    double bbox_h = 0.0;
  };
  std::vector<Row> rows;
};
KeypointTable parse_keypoint_csv(const std::string& text, bool ground_truth);

}  // namespace ambient
