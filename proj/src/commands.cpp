#include "ambient/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>

#include "ambient/butterworth.hpp"
#include "ambient/error.hpp"
#include "ambient/parallel.hpp"

namespace ambient {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t channel_seed(const Scenario& sc, std::size_t channel) {
  return splitmix(splitmix(sc.run.rng_seed) ^ splitmix(sc.scene.noise_seed + 0x1000 * (channel + 1)));
}

void update_manifest(const fs::path& out, const Scenario& sc, const std::string& stage, json entry) {
  const auto path = out / "manifest.json";
  json m = fs::exists(path) ? read_json(path) : json::object();
  m["format_version"] = 1;
  m["scenario"] = "scenario.json";
  m["scenario_name"] = sc.name;
  m["rng_seed"] = sc.run.rng_seed;
  m["stages"][stage] = std::move(entry);
  write_json(out / "scenario.json", scenario_to_json(sc));
  write_json(path, m);
}

template <class F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

std::string frame_name(std::size_t k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%03zu.%s", k, ext);
  return buf;
}

}  // namespace

std::vector<Complex> simulate_channel(const Scenario& sc, const OfdmConfig& cfg, std::size_t channel, Exec exec) {
  const auto geom = sc.geometry();
  if (channel >= geom.rx_positions.size()) fail(Errc::InvalidArgument, "no such channel");
  const Vec3& p = geom.rx_positions[channel];
  std::vector<double> extra;
  for (const auto& r : sc.scene.reflectors)
    extra.push_back(dot(direction_vector(r.theta_rad, r.phi_rad, DirectionModel::Spherical), p));

  const std::size_t n = sc.sample_count();
  const double fs = sc.run.sample_rate_hz;
  auto z = baseband_series(cfg, sc.scene, fs, sc.run.t0_s, n, extra, exec);
  if (n == 0) return z;

  double power = 0.0;
  for (const auto& v : z) power += std::norm(v);
  power /= static_cast<double>(n);

  const auto& imp = sc.impairments;
  if (imp.gate_period_s > 0.0) {
    const auto period = std::max<long long>(1, std::llround(imp.gate_period_s * fs));
    const auto on = std::llround(imp.gate_on_fraction * static_cast<double>(period));
    for (std::size_t i = 0; i < n; ++i)
      if (static_cast<long long>(i) % period >= on) z[i] = 0.0;
  }
  for (auto& v : z) v += imp.dc_offset;

  if (sc.scene.noise_snr_db && power > 0.0) {
    const double sigma = std::sqrt(power / std::pow(10.0, *sc.scene.noise_snr_db / 10.0) / 2.0);
    std::mt19937_64 rng(channel_seed(sc, channel));
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& v : z) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v += Complex(re, im);
    }
  }

  if (imp.round_robin) {
    const std::size_t m = geom.rx_positions.size();
    for (std::size_t i = channel + 1; i < n; ++i)
      if ((i + m - channel) % m != 0) z[i] = z[i - 1];
  }
  return z;
}

BasebandStream simulate_stream(const Scenario& sc, Exec exec) {
  const auto cfg = sc.ofdm_config();
  BasebandStream s;
  s.sample_rate_hz = sc.run.sample_rate_hz;
  s.t0_s = sc.run.t0_s;
  s.geometry_ref = "scenario.json#array";
  for (std::size_t c = 0; c < sc.array.channels; ++c) s.channels.push_back(simulate_channel(sc, cfg, c, exec));
  return s;
}

void run_simulate(const Scenario& sc, const fs::path& out, std::ostream& log) {
  if (sc.scene.reflectors.empty()) log << "warning: static scene (no reflectors)\n";
  const auto cfg = sc.ofdm_config();
  json files = json::array();
  for (std::size_t c = 0; c < sc.array.channels; ++c) {
    const auto z = staged("simulate", [&] { return simulate_channel(sc, cfg, c); });
    write_channel(out, c, z);
    files.push_back(fs::relative(channel_path(out, c), out).generic_string());
  }
  BasebandHeader h;
  h.channels = sc.array.channels;
  h.sample_rate_hz = sc.run.sample_rate_hz;
  h.t0_s = sc.run.t0_s;
  h.sample_count = sc.sample_count();
  h.geometry_ref = "scenario.json#array";
  write_baseband_header(out, h);
  update_manifest(out, sc, "simulate", {{"header", "baseband/header.json"}, {"payloads", files}});
  log << "simulate: " << h.channels << " channels x " << h.sample_count << " samples -> "
      << baseband_dir(out).string() << "\n";
}

json OracleReport::to_json() const {
  return {{"symbols", symbols},
          {"samples", samples},
          {"max_amplitude_rel_err", max_amplitude_rel_err},
          {"max_phase_err_rad", max_phase_err_rad},
          {"pass", pass}};
}

OracleReport run_oracle(const Scenario& sc, const OracleOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const auto base = sc.ofdm_config();
  const double fs = sc.run.sample_rate_hz;
  const double period = base.period();
  const auto symbols = static_cast<std::size_t>(std::max(1.0, std::floor(sc.run.duration_s / period + 1e-9)));

  Scene scene = sc.scene;
  scene.noise_snr_db.reset();
  Scene analytic = scene;
  analytic.beta *= opt.analytic_beta_scale;

  std::vector<double> amp_err(symbols, 0.0), phase_err(symbols, 0.0);
  std::vector<std::size_t> counts(symbols, 0);
  ErrorSlot err;
  const auto total = static_cast<std::ptrdiff_t>(symbols);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t m = 0; m < total; ++m) {
    try {
      const auto mu = static_cast<std::size_t>(m);
      OfdmConfig cfg = base;
      cfg.qam_symbols = random_qpsk(cfg.subcarriers.size(), splitmix(sc.ofdm.symbol_seed + mu));
      const double t0 = sc.run.t0_s + static_cast<double>(mu) * period;
      const auto s = synthesize_symbol(cfg, fs, t0);
      const auto r = propagate(s, scene);
      const auto y = self_mix(r, s);
      const auto z = lowpass_isolate(y, cfg.subcarrier_spacing_hz / 2.0);
      for (std::size_t i = 0; i < z.size(); ++i) {
        const Complex a = analytic_baseband(cfg, analytic, z.time_at(i)).total;
        const Complex b = z.samples[i];
        const double rel = std::abs(std::abs(b) - std::abs(a)) / std::abs(a);
        const double ph = std::abs(std::arg(b * std::conj(a)));
        amp_err[mu] = std::max(amp_err[mu], rel);
        phase_err[mu] = std::max(phase_err[mu], ph);
      }
      counts[mu] = z.size();
    } catch (...) {
      err.capture();
    }
  }
  err.rethrow_if_set();

  OracleReport rep;
  rep.symbols = symbols;
  for (std::size_t m = 0; m < symbols; ++m) {
    rep.samples += counts[m];
    rep.max_amplitude_rel_err = std::max(rep.max_amplitude_rel_err, amp_err[m]);
    rep.max_phase_err_rad = std::max(rep.max_phase_err_rad, phase_err[m]);
  }
  rep.pass = rep.max_amplitude_rel_err < opt.amplitude_tol && rep.max_phase_err_rad < opt.phase_tol;
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::vector<SanitizedRow> sanitize_baseband(const BasebandStream& stream, const SanitizeConfig& cfg,
                                            std::vector<std::vector<SanitizedPoint>>* points) {
  std::vector<SanitizedRow> rows;
  if (points) points->clear();
  for (std::size_t c = 0; c < stream.channel_count(); ++c) {
    SampledSignal raw;
    raw.samples = stream.channels[c];
    raw.sample_rate_hz = stream.sample_rate_hz;
    raw.t0_s = stream.t0_s;
    auto pts = sanitize_stream(raw, cfg);
    for (const auto& p : pts)
      if (p.valid) rows.push_back({p.t_s, p.value, c});
    if (points) points->push_back(std::move(pts));
  }
  return rows;
}

VelocityTrace velocity_from_points(const std::vector<SanitizedPoint>& pts, const Scenario& sc) {
  const auto first = std::find_if(pts.begin(), pts.end(), [](const SanitizedPoint& p) { return p.valid; });
  if (first == pts.end()) fail(Errc::SequenceTooShort, "no sanitized window survived");
  SampledSignal z;
  z.sample_rate_hz = 1.0 / sc.sanitize.window_s;
  z.t0_s = first->t_s;
  Complex held = first->value;
  for (auto it = first; it != pts.end(); ++it) {
    if (it->valid) held = it->value;
    z.samples.push_back(held);
  }
  return estimate_velocity(z, sc.ofdm_config(), sc.doppler_config());
}

VelocityTrace velocity_from_rows(std::span<const SanitizedRow> rows, const Scenario& sc) {
  std::vector<SanitizedRow> mine;
  for (const auto& r : rows)
    if (r.channel == sc.doppler.channel) mine.push_back(r);
  if (mine.empty()) fail(Errc::SequenceTooShort, "no sanitized points for channel " + std::to_string(sc.doppler.channel));
  std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.t_s < b.t_s; });

  const double w = sc.sanitize.window_s;
  const double t_first = mine.front().t_s;
  const auto last = std::llround((mine.back().t_s - t_first) / w);
  std::vector<SanitizedPoint> pts(static_cast<std::size_t>(last + 1));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].t_s = t_first + static_cast<double>(i) * w;
  for (const auto& r : mine) {
    auto& p = pts[static_cast<std::size_t>(std::llround((r.t_s - t_first) / w))];
    p.t_s = r.t_s;
    p.value = r.value;
    p.valid = true;
  }
  return velocity_from_points(pts, sc);
}

std::vector<HeatmapFrame> beamform_stream(const BasebandStream& stream, const Scenario& sc, Exec exec) {
  if (!sc.beamform.prefilter)
    return heatmap_sequence(stream, sc.geometry(), sc.grid(), sc.beamform.frame_period_s(), sc.beamform.lag_s(), exec);
  BasebandStream filtered = stream;
  for (auto& ch : filtered.channels)
    ch = butterworth_lowpass(ch, stream.sample_rate_hz, sc.sanitize.butterworth_order, sc.sanitize.butterworth_cutoff_hz,
                             true);
  return heatmap_sequence(filtered, sc.geometry(), sc.grid(), sc.beamform.frame_period_s(), sc.beamform.lag_s(), exec);
}

namespace {

void check_stream_matches(const BasebandStream& s, const Scenario& sc) {
  if (s.channel_count() != sc.array.channels)
    fail(Errc::ValidationError, "array.channels: scenario has " + std::to_string(sc.array.channels) +
                                    " channels, baseband has " + std::to_string(s.channel_count()));
  if (s.sample_rate_hz != sc.run.sample_rate_hz)
    fail(Errc::ValidationError, "run.sample_rate_hz: baseband was recorded at " + format_double(s.sample_rate_hz));
}

void write_sanitized(const fs::path& out, const Scenario& sc, const std::vector<SanitizedRow>& rows,
                     std::size_t windows) {
  write_atomic(out / "sanitized.csv", sanitized_csv(rows));
  update_manifest(out, sc, "sanitize", {{"file", "sanitized.csv"}, {"points", rows.size()}, {"windows", windows}});
}

void write_velocity(const fs::path& out, const Scenario& sc, const VelocityTrace& v, std::ostream& log) {
  write_atomic(out / "velocity.csv", velocity_csv(v));
  double mean = 0.0;
  for (double x : v.velocity_mps) mean += x;
  if (!v.velocity_mps.empty()) mean /= static_cast<double>(v.velocity_mps.size());
  update_manifest(out, sc, "velocity",
                  {{"file", "velocity.csv"}, {"channel", sc.doppler.channel}, {"rows", v.t_s.size()},
                   {"mean_velocity_mps", mean}});
  log << "velocity: " << v.t_s.size() << " rows, mean " << mean << " m/s\n";
}

void write_heatmaps(const fs::path& out, const Scenario& sc, const std::vector<HeatmapFrame>& frames,
                    std::ostream& log) {
  json list = json::array();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    double scale = 1.0;
    const auto pgm = encode_pgm(frames[k], &scale);
    write_atomic(out / "heatmaps" / frame_name(k, "pgm"), pgm);
    write_atomic(out / "heatmaps" / frame_name(k, "csv"), heatmap_csv(frames[k]));
    const auto [pi, ti] = frames[k].argmax();
    list.push_back({{"index", k},
                    {"t_s", frames[k].t_s},
                    {"pgm", "heatmaps/" + frame_name(k, "pgm")},
                    {"csv", "heatmaps/" + frame_name(k, "csv")},
                    {"pgm_scale", scale},
                    {"peak", frames[k].peak()},
                    {"peak_theta_index", ti},
                    {"peak_phi_index", pi}});
  }
  update_manifest(out, sc, "beamform",
                  {{"frames", list},
                   {"frame_period_s", sc.beamform.frame_period_s()},
                   {"t_delta_s", sc.beamform.lag_s()},
                   {"layout", "rows = phi ascending, columns = theta ascending"}});
  log << "beamform: " << frames.size() << " frames\n";
}

}  // namespace

void run_sanitize(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log) {
  const auto stream = read_baseband(in);
  check_stream_matches(stream, sc);
  std::vector<std::vector<SanitizedPoint>> pts;
  const auto rows = staged("sanitize", [&] { return sanitize_baseband(stream, sc.sanitize, &pts); });
  write_sanitized(out, sc, rows, pts.empty() ? 0 : pts.front().size());
  log << "sanitize: " << rows.size() << " points\n";
}

void run_velocity(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log) {
  const auto rows = parse_sanitized_csv(read_file(in / "sanitized.csv"));
  const auto v = staged("velocity", [&] { return velocity_from_rows(rows, sc); });
  write_velocity(out, sc, v, log);
}

void run_beamform(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log) {
  const auto stream = read_baseband(in);
  check_stream_matches(stream, sc);
  const auto frames = staged("beamform", [&] { return beamform_stream(stream, sc); });
  write_heatmaps(out, sc, frames, log);
}

void run_pipeline(const Scenario& sc, const fs::path& in, const fs::path& out, std::ostream& log) {
  fs::path src = in;
  if (src.empty() || !fs::exists(baseband_dir(src) / "header.json")) {
    run_simulate(sc, out, log);
    src = out;
  }
  const auto stream = read_baseband(src);
  check_stream_matches(stream, sc);

  std::vector<std::vector<SanitizedPoint>> pts;
  const auto rows = staged("sanitize", [&] { return sanitize_baseband(stream, sc.sanitize, &pts); });
  write_sanitized(out, sc, rows, pts.empty() ? 0 : pts.front().size());
  log << "sanitize: " << rows.size() << " points\n";

  const auto v = staged("velocity", [&] { return velocity_from_points(pts.at(sc.doppler.channel), sc); });
  write_velocity(out, sc, v, log);

  const auto frames = staged("beamform", [&] { return beamform_stream(stream, sc); });
  write_heatmaps(out, sc, frames, log);
}

namespace {

std::string fixed4(double v) {
  if (std::isnan(v)) return "     -";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.4f", v);
  return buf;
}

json ap_json(const ApSummary& s) {
  json at = json::object();
  for (const auto& [alpha, v] : s.ap_at) {
    char key[16];
    std::snprintf(key, sizeof key, "%.2f", alpha);
    at[key] = v;
  }
  return {{"mean", s.mean}, {"at", at}};
}

void print_ap_row(std::ostream& log, const ApSummary& s, const ApSummary* ar) {
  log << "    AP  AP@.50  AP@.60  AP@.70  AP@.80" << (ar ? "      AR" : "") << "\n";
  log << fixed4(s.mean);
  for (const auto& [alpha, v] : s.ap_at) {
    const int pct = static_cast<int>(std::lround(alpha * 100));
    if (pct == 50 || pct == 60 || pct == 70 || pct == 80) log << "  " << fixed4(v);
  }
  if (ar) log << "  " << fixed4(ar->mean);
  log << "\n";
}

json mask_metrics(const fs::path& pred, const fs::path& gt, std::ostream& log) {
  const auto p = parse_mask_csv(read_file(pred));
  const auto g = parse_mask_csv(read_file(gt));
  std::map<long long, const Mask*> pred_by_id;
  for (const auto& [id, m] : p) pred_by_id[id] = &m;
  if (p.size() != g.size()) fail(Errc::SchemaError, "pred and gt list different instances");

  json per = json::array();
  std::vector<double> scores;
  for (const auto& [id, m] : g) {
    const auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) fail(Errc::SchemaError, "instance " + std::to_string(id) + " missing from pred");
    const double s = iou(*it->second, m);
    scores.push_back(s);
    per.push_back({{"instance", id}, {"iou", s}});
  }
  const auto ap = ap_summary(scores);
  log << "mask segmentation, " << scores.size() << " instances\n";
  print_ap_row(log, ap, nullptr);
  return {{"task", "mask"}, {"instances", per}, {"ap", ap_json(ap)}};
}

json keypoint_metrics(const fs::path& pred_path, const fs::path& gt_path, std::ostream& log) {
  const auto pred = parse_keypoint_csv(read_file(pred_path), false);
  const auto gt = parse_keypoint_csv(read_file(gt_path), true);

  std::size_t k_count = 0;
  for (const auto& r : gt.rows) k_count = std::max(k_count, r.keypoint + 1);
  std::map<long long, KeypointInstance> inst;
  std::map<long long, std::vector<int>> seen_gt, seen_pred;
  for (const auto& r : gt.rows) {
    auto& ki = inst[r.instance];
    if (ki.gt.empty()) {
      ki.gt.resize(k_count);
      ki.pred.resize(k_count);
      ki.visibility.assign(k_count, 0);
      ki.bbox_w = r.bbox_w;
      ki.bbox_h = r.bbox_h;
      ki.scale = std::sqrt(r.bbox_w * r.bbox_h);
      seen_gt[r.instance].assign(k_count, 0);
      seen_pred[r.instance].assign(k_count, 0);
    } else if (ki.bbox_w != r.bbox_w || ki.bbox_h != r.bbox_h) {
      fail(Errc::SchemaError, "instance " + std::to_string(r.instance) + ": inconsistent bbox across rows");
    }
    if (seen_gt[r.instance][r.keypoint]++)
      fail(Errc::SchemaError, "instance " + std::to_string(r.instance) + ": duplicate gt keypoint");
    ki.gt[r.keypoint] = {r.x, r.y};
    ki.visibility[r.keypoint] = r.visibility;
  }
  for (const auto& r : pred.rows) {
    const auto it = inst.find(r.instance);
    if (it == inst.end() || r.keypoint >= k_count)
      fail(Errc::SchemaError, "pred instance " + std::to_string(r.instance) + " keypoint " +
                                  std::to_string(r.keypoint) + " has no ground truth");
    if (seen_pred[r.instance][r.keypoint]++)
      fail(Errc::SchemaError, "instance " + std::to_string(r.instance) + ": duplicate pred keypoint");
    it->second.pred[r.keypoint] = {r.x, r.y};
  }
  for (const auto& [id, seen] : seen_gt)
    for (std::size_t k = 0; k < k_count; ++k)
      if (!seen[k] || !seen_pred[id][k])
        fail(Errc::SchemaError, "instance " + std::to_string(id) + " keypoint " + std::to_string(k) + " missing");

  std::vector<KeypointInstance> list;
  std::vector<long long> ids;
  for (auto& [id, ki] : inst) {
    ids.push_back(id);
    list.push_back(std::move(ki));
  }
  const auto scores = oks_batch(list);
  const auto ap = ap_summary(scores);
  const auto ar = ar_summary(scores);

  json per = json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) per.push_back({{"instance", ids[i]}, {"oks", scores[i]}});

  json pck_rows = json::object();
  log << "keypoint estimation, " << list.size() << " instances, " << k_count << " keypoints\n";
  print_ap_row(log, ap, &ar);
  log << "PCK      ";
  for (std::size_t k = 0; k < k_count; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "  kp%-4zu", k);
    log << buf;
  }
  log << "\n";
  for (int a = 1; a <= 5; ++a) {
    const double alpha = a / 100.0;
    char key[16];
    std::snprintf(key, sizeof key, "%.2f", alpha);
    json row = json::array();
    log << "PCK@.0" << a << "  ";
    for (std::size_t k = 0; k < k_count; ++k) {
      double v = std::nan("");
      try {
        v = pck(list, k, alpha);
      } catch (const Error& e) {
        if (e.code() != Errc::NoVisibleKeypoints) throw;
      }
      row.push_back(std::isnan(v) ? json(nullptr) : json(v));
      char buf[16];
      if (std::isnan(v)) std::snprintf(buf, sizeof buf, "  %6s", "-");
      else std::snprintf(buf, sizeof buf, "  %6.2f", v);
      log << buf;
    }
    log << "\n";
    pck_rows[key] = row;
  }
  return {{"task", "keypoint"}, {"instances", per}, {"ap", ap_json(ap)}, {"ar", ap_json(ar)}, {"pck", pck_rows}};
}

}  // namespace

json run_metrics(const fs::path& pred, const fs::path& gt, MetricTask task, const fs::path& out, std::ostream& log) {
  json result = task == MetricTask::Mask ? mask_metrics(pred, gt, log) : keypoint_metrics(pred, gt, log);
  write_json(out / "metrics.json", result);
  return result;
}

}  // namespace ambient
