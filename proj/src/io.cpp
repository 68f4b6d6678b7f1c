#include "ambient/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "ambient/error.hpp"

namespace ambient {

using nlohmann::json;

void write_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(Errc::IoError, path.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp =
      path.string() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, tmp.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      fail(Errc::IoError, tmp.string() + ": write failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::IoError, path.string() + ": rename failed");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(Errc::IoError, path.string() + ": read failed");
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const auto text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Errc::ParseError, path.string() + ": not valid JSON");
  return j;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json BasebandHeader::to_json() const {
  return {{"format_version", format_version}, {"channels", channels},         {"sample_rate_hz", sample_rate_hz},
          {"t0_s", t0_s},                     {"sample_count", sample_count}, {"layout", layout},
          {"geometry_ref", geometry_ref}};
}

BasebandHeader BasebandHeader::from_json(const json& j) {
  BasebandHeader h;
  try {
    h.format_version = j.at("format_version").get<int>();
    h.channels = j.at("channels").get<std::size_t>();
    h.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    h.t0_s = j.at("t0_s").get<double>();
    h.sample_count = j.at("sample_count").get<std::size_t>();
    h.layout = j.at("layout").get<std::string>();
    h.geometry_ref = j.value("geometry_ref", std::string{});
  } catch (const json::exception& e) {
    fail(Errc::SchemaError, std::string("baseband header: ") + e.what());
  }
  if (h.format_version != kBasebandFormatVersion)
    fail(Errc::SchemaError, "baseband header: unsupported format_version " + std::to_string(h.format_version));
  if (h.layout != kBasebandLayout) fail(Errc::SchemaError, "baseband header: unsupported layout " + h.layout);
  if (!(h.sample_rate_hz > 0.0)) fail(Errc::SchemaError, "baseband header: sample_rate_hz must be > 0");
  return h;
}

fs::path baseband_dir(const fs::path& dir) { return dir / "baseband"; }
fs::path channel_path(const fs::path& dir, std::size_t channel) {
  return baseband_dir(dir) / ("ch" + std::to_string(channel) + ".cf32");
}

namespace {

void put_f32(std::string& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits >>= 8;
  }
}

float get_f32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::string encode_cf32(std::span<const Complex> samples) {
  std::string out;
  out.reserve(samples.size() * 8);
  for (const auto& s : samples) {
    put_f32(out, static_cast<float>(s.real()));
    put_f32(out, static_cast<float>(s.imag()));
  }
  return out;
}

std::vector<Complex> decode_cf32(std::string_view bytes, const std::string& context) {
  if (bytes.size() % 8 != 0) fail(Errc::SchemaError, context + ": payload is not a whole number of I/Q pairs");
  std::vector<Complex> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = Complex(get_f32(bytes.data() + 8 * i), get_f32(bytes.data() + 8 * i + 4));
  return out;
}

void write_baseband_header(const fs::path& dir, const BasebandHeader& h) {
  write_json(baseband_dir(dir) / "header.json", h.to_json());
}

BasebandHeader read_baseband_header(const fs::path& dir) {
  return BasebandHeader::from_json(read_json(baseband_dir(dir) / "header.json"));
}

void write_channel(const fs::path& dir, std::size_t channel, std::span<const Complex> samples) {
  write_atomic(channel_path(dir, channel), encode_cf32(samples));
}

std::vector<Complex> read_channel(const fs::path& dir, const BasebandHeader& h, std::size_t channel) {
  if (channel >= h.channels) fail(Errc::InvalidArgument, "channel " + std::to_string(channel) + " not in header");
  const auto path = channel_path(dir, channel);
  auto samples = decode_cf32(read_file(path), path.string());
  if (samples.size() != h.sample_count)
    fail(Errc::SchemaError, path.string() + ": " + std::to_string(samples.size()) + " samples, header says " +
                                std::to_string(h.sample_count));
  return samples;
}

void write_baseband(const fs::path& dir, const BasebandStream& stream) {
  stream.validate();
  for (std::size_t i = 0; i < stream.channel_count(); ++i) write_channel(dir, i, stream.channels[i]);
  BasebandHeader h;
  h.channels = stream.channel_count();
  h.sample_rate_hz = stream.sample_rate_hz;
  h.t0_s = stream.t0_s;
  h.sample_count = stream.length();
  h.geometry_ref = stream.geometry_ref;
  write_baseband_header(dir, h);
}

BasebandStream read_baseband(const fs::path& dir) {
  const auto h = read_baseband_header(dir);
  BasebandStream s;
  s.sample_rate_hz = h.sample_rate_hz;
  s.t0_s = h.t0_s;
  s.geometry_ref = h.geometry_ref;
  for (std::size_t i = 0; i < h.channels; ++i) s.channels.push_back(read_channel(dir, h, i));
  return s;
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of_row;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(Errc::SchemaError, "line 1: missing column \"" + name + "\"");
    return static_cast<std::size_t>(it - header.begin());
  }

  [[noreturn]] void bad(std::size_t row, std::size_t col, const std::string& why) const {
    fail(Errc::SchemaError, "line " + std::to_string(line_of_row[row]) + ", column \"" + header[col] + "\": " + why);
  }

  double num(std::size_t row, std::size_t col) const {
    const auto& s = rows[row][col];
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      bad(row, col, "not a number: \"" + s + "\"");
    return v;
  }

  long long integer(std::size_t row, std::size_t col) const {
    const auto& s = rows[row][col];
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) bad(row, col, "not an integer: \"" + s + "\"");
    return v;
  }
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_commas(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      fail(Errc::SchemaError, "line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_of_row.push_back(lineno);
  }
  if (t.header.empty()) fail(Errc::SchemaError, "line 1: missing header");
  return t;
}

}  // namespace

std::string sanitized_csv(std::span<const SanitizedRow> rows) {
  std::string out = "t_s,re,im,channel\n";
  for (const auto& r : rows)
    out += format_double(r.t_s) + "," + format_double(r.value.real()) + "," + format_double(r.value.imag()) + "," +
           std::to_string(r.channel) + "\n";
  return out;
}

std::vector<SanitizedRow> parse_sanitized_csv(const std::string& text) {
  const auto t = parse_csv(text);
  const auto ct = t.column("t_s"), cr = t.column("re"), ci = t.column("im"), cc = t.column("channel");
  std::vector<SanitizedRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ch = t.integer(i, cc);
    if (ch < 0) t.bad(i, cc, "negative channel");
    rows.push_back({t.num(i, ct), Complex(t.num(i, cr), t.num(i, ci)), static_cast<std::size_t>(ch)});
  }
  return rows;
}

std::string velocity_csv(const VelocityTrace& v) {
  std::string out = "t_s,phase_rate_rad_s,velocity_mps\n";
  for (std::size_t i = 0; i < v.t_s.size(); ++i)
    out += format_double(v.t_s[i]) + "," + format_double(v.phase_rate_rad_s[i]) + "," +
           format_double(v.velocity_mps[i]) + "\n";
  return out;
}

VelocityTrace parse_velocity_csv(const std::string& text) {
  const auto t = parse_csv(text);
  const auto ct = t.column("t_s"), cr = t.column("phase_rate_rad_s"), cv = t.column("velocity_mps");
  VelocityTrace v;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    v.t_s.push_back(t.num(i, ct));
    v.phase_rate_rad_s.push_back(t.num(i, cr));
    v.velocity_mps.push_back(t.num(i, cv));
  }
  return v;
}

std::string heatmap_csv(const HeatmapFrame& f) {
  std::string out;
  for (std::size_t p = 0; p < f.n_phi; ++p) {
    for (std::size_t t = 0; t < f.n_theta; ++t) {
      if (t) out += ',';
      out += format_double(f.at(p, t));
    }
    out += '\n';
  }
  return out;
}

HeatmapFrame parse_heatmap_csv(const std::string& text) {
  HeatmapFrame f;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (f.n_phi == 0) f.n_theta = fields.size();
    if (fields.size() != f.n_theta)
      fail(Errc::SchemaError, "line " + std::to_string(lineno) + ": ragged heatmap row");
    for (const auto& s : fields) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(Errc::SchemaError, "line " + std::to_string(lineno) + ": not a number: \"" + s + "\"");
      f.values.push_back(v);
    }
    ++f.n_phi;
  }
  return f;
}

std::string encode_pgm(const HeatmapFrame& f, double* scale_out) {
  const double peak = f.peak();
  const double scale = peak > 0.0 ? peak : 1.0;
  if (scale_out) *scale_out = scale;
  std::string out = "P5\n" + std::to_string(f.n_theta) + " " + std::to_string(f.n_phi) + "\n65535\n";
  for (double v : f.values) {
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v / scale, 0.0, 1.0) * 65535.0));
    out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xFF));
  }
  return out;
}

PgmImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const auto start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return std::string(bytes.substr(start, pos - start));
  };
  if (token() != "P5") fail(Errc::SchemaError, "pgm: not a binary PGM");
  PgmImage img;
  try {
    img.width = std::stoul(token());
    img.height = std::stoul(token());
    if (std::stoul(token()) != 65535) fail(Errc::SchemaError, "pgm: expected maxval 65535");
  } catch (const std::logic_error&) {
    fail(Errc::SchemaError, "pgm: malformed header");
  }
  ++pos;  // single whitespace before the raster
  if (bytes.size() - pos != img.width * img.height * 2) fail(Errc::SchemaError, "pgm: raster size mismatch");
  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = static_cast<std::uint16_t>((static_cast<unsigned char>(bytes[pos + 2 * i]) << 8) |
                                               static_cast<unsigned char>(bytes[pos + 2 * i + 1]));
  return img;
}

std::vector<std::pair<long long, Mask>> parse_mask_csv(const std::string& text) {
  const auto t = parse_csv(text);
  const auto ci = t.column("instance"), cr = t.column("row"), cc = t.column("col"), cv = t.column("value");
  struct Acc {
    std::map<std::pair<long long, long long>, int> px;
    std::size_t first_row;
  };
  std::map<long long, Acc> by_instance;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto inst = t.integer(i, ci);
    const auto r = t.integer(i, cr), c = t.integer(i, cc), v = t.integer(i, cv);
    if (r < 0) t.bad(i, cr, "negative index");
    if (c < 0) t.bad(i, cc, "negative index");
    if (v != 0 && v != 1) t.bad(i, cv, "mask value must be 0 or 1");
    auto& acc = by_instance.try_emplace(inst, Acc{{}, i}).first->second;
    if (!acc.px.emplace(std::make_pair(r, c), static_cast<int>(v)).second) t.bad(i, cr, "duplicate pixel");
  }
  std::vector<std::pair<long long, Mask>> out;
  for (const auto& [inst, acc] : by_instance) {
    long long rows = 0, cols = 0;
    for (const auto& [rc, _] : acc.px) {
      rows = std::max(rows, rc.first + 1);
      cols = std::max(cols, rc.second + 1);
    }
    if (static_cast<std::size_t>(rows * cols) != acc.px.size())
      fail(Errc::SchemaError, "line " + std::to_string(t.line_of_row[acc.first_row]) + ": instance " +
                                  std::to_string(inst) + " does not list a full " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + " raster");
    auto m = Mask::empty(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (const auto& [rc, v] : acc.px)
      m.pixels[static_cast<std::size_t>(rc.first * cols + rc.second)] = static_cast<std::uint8_t>(v);
    out.emplace_back(inst, std::move(m));
  }
  return out;
}

KeypointTable parse_keypoint_csv(const std::string& text, bool ground_truth) {
  const auto t = parse_csv(text);
  const auto ci = t.column("instance"), ck = t.column("keypoint"), cx = t.column("x"), cy = t.column("y");
  std::size_t cvis = 0, cw = 0, ch = 0;
  if (ground_truth) {
    cvis = t.column("visibility");
    cw = t.column("bbox_w");
    ch = t.column("bbox_h");
  }
  KeypointTable table;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    KeypointTable::Row r;
    r.instance = t.integer(i, ci);
    const auto k = t.integer(i, ck);
    if (k < 0) t.bad(i, ck, "negative keypoint index");
    r.keypoint = static_cast<std::size_t>(k);
    r.x = t.num(i, cx);
    r.y = t.num(i, cy);
    if (ground_truth) {
      const auto v = t.integer(i, cvis);
      if (v < 0 || v > 2) t.bad(i, cvis, "visibility must be 0, 1 or 2");
      r.visibility = static_cast<int>(v);
      r.bbox_w = t.num(i, cw);
      r.bbox_h = t.num(i, ch);
      if (r.bbox_w < 0.0) t.bad(i, cw, "negative box size");
      if (r.bbox_h < 0.0) t.bad(i, ch, "negative box size");
    }
    table.rows.push_back(r);
  }
  return table;
}

}  // namespace ambient
