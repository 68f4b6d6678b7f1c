#include "ambient/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ambient/error.hpp"

extern char** environ;

namespace ambient {

using nlohmann::json;

namespace {

constexpr double kDeg = kPi / 180.0;

[[noreturn]] void invalid(const std::string& field, const std::string& reason) {
  fail(Errc::ValidationError, field + ": " + reason);
}

// Walks one JSON object, remembers which keys were read and rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const json* v = find(key)) out = convert<T>(*v, field(key));
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (const json* v = find(key)) out = convert<T>(*v, field(key));
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const json empty = json::object();
    if (it == j_.end() || it->is_null()) return Reader(empty, field(key));
    return Reader(*it, field(key));
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) invalid(field(key), "unknown key");
  }

  template <class T>
  static T convert(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) invalid(field, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) invalid(field, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, Complex>) {
      if (v.is_number()) return Complex(v.get<double>(), 0.0);
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        invalid(field, "expected a number or [re, im]");
      return Complex(v[0].get<double>(), v[1].get<double>());
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) invalid(field, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<long long>() < 0) invalid(field, "must be >= 0");
      }
      return v.get<T>();
    } else {
      if (!v.is_number()) invalid(field, "expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) invalid(field, "must be finite");
      return d;
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

std::string model_name(DirectionModel m) { return m == DirectionModel::Printed ? "printed" : "spherical"; }
std::string path_name(PathModel m) { return m == PathModel::OneWay ? "one_way" : "round_trip"; }

Reflector read_reflector(Reader r) {
  Reflector refl;
  r.get("alpha", refl.alpha);
  double theta_deg = 0.0, phi_deg = 0.0;
  r.get("theta_deg", theta_deg);
  r.get("phi_deg", phi_deg);
  refl.theta_rad = theta_deg * kDeg;
  refl.phi_rad = phi_deg * kDeg;

  std::optional<double> d0, v;
  r.get("d0_m", d0);
  r.get("v_mps", v);
  if (const json* wp = r.find("waypoints")) {
    if (d0 || v) invalid(r.field("waypoints"), "give either waypoints or d0_m/v_mps");
    if (!wp->is_array()) invalid(r.field("waypoints"), "expected [[t_s, d_m], ...]");
    WaypointTrajectory traj;
    for (const auto& p : *wp) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        invalid(r.field("waypoints"), "expected [[t_s, d_m], ...]");
      traj.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    refl.trajectory = traj;
  } else {
    refl.trajectory = LinearTrajectory{d0.value_or(0.0), v.value_or(0.0)};
  }
  r.finish();
  return refl;
}

json reflector_json(const Reflector& refl) {
  json j;
  j["alpha"] = complex_json(refl.alpha);
  j["theta_deg"] = refl.theta_rad / kDeg;
  j["phi_deg"] = refl.phi_rad / kDeg;
  if (const auto* lin = std::get_if<LinearTrajectory>(&refl.trajectory)) {
    j["d0_m"] = lin->d0_m;
    j["v_mps"] = lin->v_mps;
  } else {
    json pts = json::array();
    for (const auto& [t, d] : std::get<WaypointTrajectory>(refl.trajectory).points) pts.push_back({t, d});
    j["waypoints"] = pts;
  }
  return j;
}

template <class Fn>
void with_field(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == Errc::ValidationError && e.detail().rfind(field, 0) == 0) throw;
    invalid(field, e.detail());
  }
}

bool is_multiple(double value, double step) {
  const double r = value / step;
  return std::abs(r - std::round(r)) < 1e-6 * std::max(1.0, r) && std::round(r) >= 1.0;
}

}  // namespace

OfdmConfig OfdmSpec::build() const {
  auto ks = subcarrier_range(subcarrier_min, subcarrier_max, skip_dc);
  auto symbols = random_qpsk(ks.size(), symbol_seed);
  return make_ofdm(carrier_hz, subcarrier_spacing_hz, std::move(ks), std::move(symbols));
}

ArrayGeometry Scenario::geometry() const {
  ArrayGeometry g;
  g.rx_positions = array.rx_positions;
  g.wavelength_m = kSpeedOfLight / ofdm.carrier_hz;
  return g;
}

DirectionGrid Scenario::grid() const {
  const auto& b = beamform;
  return uniform_grid(b.theta_min_deg * kDeg, b.theta_max_deg * kDeg, b.n_theta, b.phi_min_deg * kDeg,
                      b.phi_max_deg * kDeg, b.n_phi, b.direction_model);
}

std::size_t Scenario::sample_count() const {
  return static_cast<std::size_t>(std::llround(run.duration_s * run.sample_rate_hz));
}

DopplerConfig Scenario::doppler_config() const {
  DopplerConfig dc;
  dc.t_delta_s = doppler.t_delta_s;
  dc.path_model = scene.path_model;
  return dc;
}

void Scenario::finalize() {
  if (!(ofdm.carrier_hz > 0.0)) invalid("ofdm.carrier_hz", "must be > 0");
  if (!(ofdm.subcarrier_spacing_hz > 0.0)) invalid("ofdm.subcarrier_spacing_hz", "must be > 0");
  if (ofdm.subcarrier_min > ofdm.subcarrier_max) invalid("ofdm.subcarrier_min", "must be <= subcarrier_max");
  if (ofdm.skip_dc && ofdm.subcarrier_min == 0 && ofdm.subcarrier_max == 0)
    invalid("ofdm.subcarrier_min", "subcarrier set is empty");

  if (!(run.duration_s >= 0.0)) invalid("run.duration_s", "must be >= 0");
  if (!(run.sample_rate_hz > 0.0)) invalid("run.sample_rate_hz", "must be > 0");

  with_field("scene", [&] { scene.validate(); });
  if (!(impairments.gate_period_s >= 0.0)) invalid("scene.impairments.gate_period_s", "must be >= 0");
  if (!(impairments.gate_on_fraction >= 0.0 && impairments.gate_on_fraction <= 1.0))
    invalid("scene.impairments.gate_on_fraction", "must lie in [0, 1]");

  const double lambda = kSpeedOfLight / ofdm.carrier_hz;
  if (array.layout == "ring") {
    if (array.channels != 8) invalid("array.channels", "ring layout has 8 receivers, got " + std::to_string(array.channels));
    if (!array.spacing_m) array.spacing_m = lambda / 2.0;
    if (!(*array.spacing_m > 0.0)) invalid("array.spacing_m", "must be > 0");
    const auto ring = ring_array(lambda, *array.spacing_m).rx_positions;
    if (!array.rx_positions.empty() && array.rx_positions != ring)
      invalid("array.rx_positions", "ring layout positions are derived; use layout \"custom\" to set them");
    array.rx_positions = ring;
  } else if (array.layout == "custom") {
    if (array.spacing_m) invalid("array.spacing_m", "only used by the ring layout");
    if (array.rx_positions.size() != array.channels)
      invalid("array.channels", std::to_string(array.channels) + " channels but " +
                                    std::to_string(array.rx_positions.size()) + " rx_positions");
  } else {
    invalid("array.layout", "expected \"ring\" or \"custom\"");
  }
  with_field("array", [&] { geometry().validate(); });

  with_field("sanitize", [&] { sanitize.validate(); });
  if (std::llround(sanitize.window_s * run.sample_rate_hz) < 1)
    invalid("sanitize.window_s", "shorter than one sample");

  const auto& b = beamform;
  if (b.n_theta < 1 || b.n_phi < 1) invalid("beamform.n_theta", "grid needs at least one cell per axis");
  if (b.n_theta > 1 && !(b.theta_max_deg > b.theta_min_deg)) invalid("beamform.theta_max_deg", "must exceed theta_min_deg");
  if (b.n_phi > 1 && !(b.phi_max_deg > b.phi_min_deg)) invalid("beamform.phi_max_deg", "must exceed phi_min_deg");
  if (!(b.frame_rate_hz > 0.0)) invalid("beamform.frame_rate_hz", "must be > 0");
  if (b.t_delta_s && !(*b.t_delta_s >= 0.0)) invalid("beamform.t_delta_s", "must be >= 0");

  if (!is_multiple(doppler.t_delta_s, sanitize.window_s))
    invalid("doppler.t_delta_s", "must be a positive multiple of sanitize.window_s");
  if (doppler.channel >= array.channels) invalid("doppler.channel", "no such channel");
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  Reader root(j, "");
  root.get("name", sc.name);

  {
    auto r = root.child("ofdm");
    r.get("carrier_hz", sc.ofdm.carrier_hz);
    r.get("subcarrier_spacing_hz", sc.ofdm.subcarrier_spacing_hz);
    r.get("subcarrier_min", sc.ofdm.subcarrier_min);
    r.get("subcarrier_max", sc.ofdm.subcarrier_max);
    r.get("skip_dc", sc.ofdm.skip_dc);
    r.get("symbol_seed", sc.ofdm.symbol_seed);
    r.finish();
  }
  {
    auto r = root.child("scene");
    r.get("beta", sc.scene.beta);
    std::string pm = path_name(sc.scene.path_model);
    r.get("path_model", pm);
    if (pm == "one_way") sc.scene.path_model = PathModel::OneWay;
    else if (pm == "round_trip") sc.scene.path_model = PathModel::RoundTrip;
    else invalid("scene.path_model", "expected \"one_way\" or \"round_trip\"");
    r.get("noise_snr_db", sc.scene.noise_snr_db);
    r.get("noise_seed", sc.scene.noise_seed);
    if (const json* refl = r.find("reflectors")) {
      if (!refl->is_array()) invalid("scene.reflectors", "expected an array");
      for (std::size_t i = 0; i < refl->size(); ++i)
        sc.scene.reflectors.push_back(read_reflector(Reader((*refl)[i], "scene.reflectors." + std::to_string(i))));
    }
    auto imp = r.child("impairments");
    imp.get("dc_offset", sc.impairments.dc_offset);
    imp.get("gate_period_s", sc.impairments.gate_period_s);
    imp.get("gate_on_fraction", sc.impairments.gate_on_fraction);
    imp.get("round_robin", sc.impairments.round_robin);
    imp.finish();
    r.finish();
  }
  {
    auto r = root.child("array");
    r.get("layout", sc.array.layout);
    r.get("spacing_m", sc.array.spacing_m);
    r.get("channels", sc.array.channels);
    if (const json* pos = r.find("rx_positions")) {
      if (!pos->is_array()) invalid("array.rx_positions", "expected [[x, y, z], ...]");
      for (const auto& p : *pos) {
        if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number())
          invalid("array.rx_positions", "expected [[x, y, z], ...]");
        sc.array.rx_positions.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
      }
    }
    r.finish();
  }
  {
    auto r = root.child("sanitize");
    auto& s = sc.sanitize;
    r.get("butterworth_order", s.butterworth_order);
    r.get("butterworth_cutoff_hz", s.butterworth_cutoff_hz);
    r.get("bias_k", s.bias_k);
    r.get("origin_radius", s.origin_radius);
    r.get("origin_radius_rms_fraction", s.origin_radius_rms_fraction);
    r.get("lof_k", s.lof_k);
    r.get("lof_threshold", s.lof_threshold);
    r.get("project_k", s.project_k);
    r.get("rng_seed", s.rng_seed);
    r.get("window_s", s.window_s);
    r.get("decimation", s.decimation);
    r.finish();
  }
  {
    auto r = root.child("beamform");
    auto& b = sc.beamform;
    r.get("theta_min_deg", b.theta_min_deg);
    r.get("theta_max_deg", b.theta_max_deg);
    r.get("n_theta", b.n_theta);
    r.get("phi_min_deg", b.phi_min_deg);
    r.get("phi_max_deg", b.phi_max_deg);
    r.get("n_phi", b.n_phi);
    std::string model = model_name(b.direction_model);
    r.get("direction_model", model);
    if (model == "printed") b.direction_model = DirectionModel::Printed;
    else if (model == "spherical") b.direction_model = DirectionModel::Spherical;
    else invalid("beamform.direction_model", "expected \"printed\" or \"spherical\"");
    r.get("frame_rate_hz", b.frame_rate_hz);
    r.get("t_delta_s", b.t_delta_s);
    r.get("prefilter", b.prefilter);
    r.finish();
  }
  {
    auto r = root.child("doppler");
    r.get("t_delta_s", sc.doppler.t_delta_s);
    r.get("channel", sc.doppler.channel);
    r.finish();
  }
  {
    auto r = root.child("run");
    r.get("duration_s", sc.run.duration_s);
    r.get("sample_rate_hz", sc.run.sample_rate_hz);
    r.get("t0_s", sc.run.t0_s);
    r.get("rng_seed", sc.run.rng_seed);
    r.finish();
  }
  root.finish();
  sc.finalize();
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["ofdm"] = {{"carrier_hz", sc.ofdm.carrier_hz},
               {"subcarrier_spacing_hz", sc.ofdm.subcarrier_spacing_hz},
               {"subcarrier_min", sc.ofdm.subcarrier_min},
               {"subcarrier_max", sc.ofdm.subcarrier_max},
               {"skip_dc", sc.ofdm.skip_dc},
               {"symbol_seed", sc.ofdm.symbol_seed}};

  json refl = json::array();
  for (const auto& r : sc.scene.reflectors) refl.push_back(reflector_json(r));
  j["scene"] = {{"beta", complex_json(sc.scene.beta)},
                {"path_model", path_name(sc.scene.path_model)},
                {"noise_snr_db", sc.scene.noise_snr_db ? json(*sc.scene.noise_snr_db) : json(nullptr)},
                {"noise_seed", sc.scene.noise_seed},
                {"reflectors", refl},
                {"impairments",
                 {{"dc_offset", complex_json(sc.impairments.dc_offset)},
                  {"gate_period_s", sc.impairments.gate_period_s},
                  {"gate_on_fraction", sc.impairments.gate_on_fraction},
                  {"round_robin", sc.impairments.round_robin}}}};

  json pos = json::array();
  for (const auto& p : sc.array.rx_positions) pos.push_back({p.x, p.y, p.z});
  j["array"] = {{"layout", sc.array.layout},
                {"spacing_m", sc.array.spacing_m ? json(*sc.array.spacing_m) : json(nullptr)},
                {"channels", sc.array.channels},
                {"rx_positions", pos}};

  const auto& s = sc.sanitize;
  j["sanitize"] = {{"butterworth_order", s.butterworth_order},
                   {"butterworth_cutoff_hz", s.butterworth_cutoff_hz},
                   {"bias_k", s.bias_k},
                   {"origin_radius", s.origin_radius ? json(*s.origin_radius) : json(nullptr)},
                   {"origin_radius_rms_fraction", s.origin_radius_rms_fraction},
                   {"lof_k", s.lof_k},
                   {"lof_threshold", s.lof_threshold},
                   {"project_k", s.project_k},
                   {"rng_seed", s.rng_seed},
                   {"window_s", s.window_s},
                   {"decimation", s.decimation}};

  const auto& b = sc.beamform;
  j["beamform"] = {{"theta_min_deg", b.theta_min_deg},
                   {"theta_max_deg", b.theta_max_deg},
                   {"n_theta", b.n_theta},
                   {"phi_min_deg", b.phi_min_deg},
                   {"phi_max_deg", b.phi_max_deg},
                   {"n_phi", b.n_phi},
                   {"direction_model", model_name(b.direction_model)},
                   {"frame_rate_hz", b.frame_rate_hz},
                   {"t_delta_s", b.lag_s()},
                   {"prefilter", b.prefilter}};
  j["doppler"] = {{"t_delta_s", sc.doppler.t_delta_s}, {"channel", sc.doppler.channel}};
  j["run"] = {{"duration_s", sc.run.duration_s},
              {"sample_rate_hz", sc.run.sample_rate_hz},
              {"t0_s", sc.run.t0_s},
              {"rng_seed", sc.run.rng_seed}};
  return j;
}

void apply_env_overrides(json& j, const std::map<std::string, std::string>& env) {
  static const std::string prefix = "AMBIENT_";
  for (const auto& [name, raw] : env) {
    if (name.rfind(prefix, 0) != 0 || name.find("__") == std::string::npos) continue;
    std::vector<std::string> parts;
    std::string rest = name.substr(prefix.size());
    for (std::size_t pos; (pos = rest.find("__")) != std::string::npos; rest.erase(0, pos + 2))
      parts.push_back(rest.substr(0, pos));
    parts.push_back(rest);
    for (auto& p : parts) std::transform(p.begin(), p.end(), p.begin(), [](unsigned char c) { return std::tolower(c); });

    json* node = &j;
    std::string field;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto& part = parts[i];
      field += (field.empty() ? "" : ".") + part;
      const bool last = i + 1 == parts.size();
      if (node->is_array()) {
        if (part.empty() || !std::all_of(part.begin(), part.end(), ::isdigit))
          invalid(field, "expected an array index in " + name);
        const auto idx = std::stoul(part);
        if (idx >= node->size()) invalid(field, "index out of range in " + name);
        node = &(*node)[idx];
      } else {
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) invalid(field, "cannot descend into a scalar in " + name);
        node = &(*node)[part];
      }
      if (last) {
        json value = json::parse(raw, nullptr, false);
        *node = value.is_discarded() ? json(raw) : value;
      }
    }
  }
}

std::map<std::string, std::string> process_env_overrides() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    if (kv.rfind("AMBIENT_", 0) == 0) env.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return env;
}

Scenario parse_scenario(const std::string& text, const std::map<std::string, std::string>& env) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    std::string what = e.what();
    if (const auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    fail(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
  }
  apply_env_overrides(j, env);
  return scenario_from_json(j);
}

Scenario load_scenario(const std::string& path_or_preset) {
  namespace fs = std::filesystem;
  const auto env = process_env_overrides();
  if (!fs::exists(path_or_preset)) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), path_or_preset) != names.end()) {
      auto j = scenario_to_json(preset(path_or_preset));
      apply_env_overrides(j, env);
      return scenario_from_json(j);
    }
    fail(Errc::IoError, "cannot open scenario " + path_or_preset);
  }
  std::ifstream in(path_or_preset, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open scenario " + path_or_preset);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), env);
}

std::vector<std::string> preset_names() { return {"reference", "oracle_scaled", "static"}; }

Scenario preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "reference" || name == "static") {
    Reflector mover;
    // |z| is about 1 with 1332 unit-power subcarriers.
    mover.alpha = Complex(7.5e-4, 0.0);
    mover.trajectory = LinearTrajectory{3.0, name == "static" ? 0.0 : 0.8};
    mover.theta_rad = 20.0 * kDeg;
    mover.phi_rad = 10.0 * kDeg;
    sc.scene.reflectors = {mover};
    sc.impairments.dc_offset = Complex(0.04, -0.03);
    if (name == "reference") {
      sc.scene.noise_snr_db = 0.0;
      sc.scene.noise_seed = 7;
      sc.impairments.gate_period_s = 0.01;
      sc.impairments.gate_on_fraction = 0.7;
    }
  } else if (name == "oracle_scaled") {
    sc.ofdm.carrier_hz = 200e3;
    sc.ofdm.subcarrier_spacing_hz = 1e3;
    sc.ofdm.subcarrier_min = -8;
    sc.ofdm.subcarrier_max = 8;
    sc.run.sample_rate_hz = 4e6;
    sc.run.duration_s = 0.15;
    sc.sanitize.decimation = 1;
    sc.doppler.t_delta_s = 0.01;
    const double d0[] = {3.0, 7.5, 12.0};
    const double v[] = {60.0, -35.0, 0.0};
    const Complex alpha[] = {{1.0, 0.0}, std::polar(0.5, 0.7), std::polar(0.25, -1.9)};
    for (int i = 0; i < 3; ++i) {
      Reflector r;
      r.alpha = alpha[i];
      r.trajectory = LinearTrajectory{d0[i], v[i]};
      r.theta_rad = (-30.0 + 25.0 * i) * kDeg;
      sc.scene.reflectors.push_back(r);
    }
  } else {
    fail(Errc::ValidationError, "preset: unknown preset \"" + name + "\"");
  }
  sc.finalize();
  return sc;
}

}  // namespace ambient
