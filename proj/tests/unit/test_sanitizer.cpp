#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "ambient/error.hpp"
#include "ambient/sanitizer.hpp"
#include "doctest.h"
#include "oracles/synthetic.hpp"

using namespace ambient;

namespace {

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("no ambient::Error thrown");
  return Error(Errc::InvalidArgument, "");
}

ConstellationFrame frame_of(std::vector<Complex> pts) {
  ConstellationFrame f;
  f.points = std::move(pts);
  return f;
}

std::vector<Complex> blob(Complex c, double sigma, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<Complex> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(c + Complex(g(rng), g(rng)));
  return out;
}

}  // namespace

TEST_CASE("bias correction of a centred cluster is a near-zero shift") {
  std::mt19937_64 rng(1);
  const auto pts = blob({0.0, 0.0}, 0.01, 90, rng);
  const auto out = bias_correct(frame_of(pts), SanitizeConfig{});
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(out.points[i] - pts[i]) < 0.01);
}

TEST_CASE("bias correction removes a planted static offset") {
  std::mt19937_64 rng(2);
  auto pts = blob({1.0, 1.0}, 0.01, 100, rng);
  const auto far = blob({6.0, -4.0}, 0.01, 100, rng);
  pts.insert(pts.end(), far.begin(), far.end());
  const auto out = bias_correct(frame_of(pts), SanitizeConfig{});
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(pts[i] - out.points[i] - Complex(1.0, 1.0)) < 0.01);
}

TEST_CASE("bias correction of identical points lands on the origin") {
  const auto out = bias_correct(frame_of(std::vector<Complex>(200, Complex(0.6, -0.2))), SanitizeConfig{});
  for (const auto& p : out.points) CHECK(std::abs(p) < 1e-12);
}

TEST_CASE("bias correction needs bias_k points") {
  const auto e = error_of([] { bias_correct(frame_of({{1.0, 0.0}, {0.0, 1.0}}), SanitizeConfig{}); });
  CHECK(e.code() == Errc::TooFewPoints);
}

TEST_CASE("origin discard keeps exactly the points outside the radius") {
  const auto f = frame_of({{0.0, 0.0}, {0.01, 0.0}, {0.0, 0.2}, {1e-9, 0.0}});
  CHECK(discard_near_origin(f, 0.0).points.size() == 3);
  const auto kept = discard_near_origin(f, 0.05);
  REQUIRE(kept.points.size() == 1);
  CHECK(kept.points[0] == Complex(0.0, 0.2));
  CHECK(discard_near_origin(f, 5.0).points.empty());
}

TEST_CASE("lof filter drops an isolated point, keeps the blob bulk and duplicates") {
  std::mt19937_64 rng(3);
  auto pts = blob({0.0, 0.0}, 0.1, 50, rng);
  pts.push_back({1.0, 1.0});
  const auto out = lof_filter(frame_of(pts), 10, 1.5);
  CHECK(out.points.size() >= 45);
  CHECK(out.points.size() <= 50);
  CHECK(std::find(out.points.begin(), out.points.end(), Complex(1.0, 1.0)) == out.points.end());
  std::vector<Complex> dup(40, Complex(0.3, 0.3));
  CHECK(lof_filter(frame_of(dup), 10, 1.5).points.size() == 40);
  CHECK(error_of([] { lof_filter(frame_of(std::vector<Complex>(5)), 5, 1.5); }).code() == Errc::TooFewPoints);
}

TEST_CASE("projection") {
  CHECK(project(frame_of({{0.25, -0.5}}), 3, 0) == Complex(0.25, -0.5));
  std::mt19937_64 rng(4);
  auto pts = blob({0.3, 0.4}, 0.01, 80, rng);
  const auto other = blob({-0.8, 0.1}, 0.01, 10, rng);
  pts.insert(pts.end(), other.begin(), other.end());
  CHECK(std::abs(project(frame_of(pts), 3, 0) - Complex(0.3, 0.4)) < 0.01);
  CHECK(error_of([] { project(frame_of({}), 3, 0); }).code() == Errc::EmptyFrame);
}

TEST_CASE("planted windows come back near the moving-cluster centroid") {
  SanitizeConfig cfg;
  int close = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto w = synth::constellation_window(s);
    close += std::abs(sanitize_points(frame_of(w.points), cfg) - w.truth) / w.scale <= 0.05;
  }
  CHECK(close >= 38);
}

TEST_CASE("a purely static window is empty") {
  std::mt19937_64 rng(5);
  const auto pts = blob({0.2, -0.1}, 1e-4, 300, rng);
  const auto e = error_of([&] { sanitize_points(frame_of(pts), SanitizeConfig{}); });
  CHECK(e.code() == Errc::EmptyFrame);
  CHECK(!e.stage().empty());
}

TEST_CASE("stage errors carry the stage tag") {
  const auto e = error_of([] { sanitize_points(frame_of({{1.0, 0.0}, {2.0, 0.0}}), SanitizeConfig{}); });
  CHECK(e.code() == Errc::TooFewPoints);
  CHECK(e.stage() == "bias");
}

TEST_CASE("constant offsets that keep the static cluster nearest the origin are absorbed") {
  SanitizeConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto w = synth::constellation_window(100 + s);
    auto shifted = w.points;
    for (auto& p : shifted) p += Complex(0.12, -0.09);
    const auto a = sanitize_points(frame_of(w.points), cfg), b = sanitize_points(frame_of(shifted), cfg);
    CHECK(std::abs(a - b) / w.scale < 0.02);
  }
}

TEST_CASE("point order does not matter") {
  SanitizeConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto w = synth::constellation_window(200 + s);
    auto shuffled = w.points;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(s));
    const auto a = sanitize_points(frame_of(w.points), cfg), b = sanitize_points(frame_of(shuffled), cfg);
    CHECK(std::abs(a - b) / w.scale < 0.02);
  }
}

TEST_CASE("filtering stages never add points") {
  SanitizeConfig cfg;
  const auto w = synth::constellation_window(7);
  const auto f = frame_of(w.points);
  const auto b = bias_correct(f, cfg);
  CHECK(b.points.size() == f.points.size());
  const auto d = discard_near_origin(b, 0.05);
  CHECK(d.points.size() <= b.points.size());
  CHECK(lof_filter(d, cfg.lof_k, cfg.lof_threshold).points.size() <= d.points.size());
}

TEST_CASE("sanitizing is deterministic") {
  const auto w = synth::constellation_window(9);
  CHECK(sanitize_points(frame_of(w.points), SanitizeConfig{}) == sanitize_points(frame_of(w.points), SanitizeConfig{}));
}

TEST_CASE("a 2 MSPS stream in 10 ms windows yields 100 points per second") {
  SampledSignal raw;
  raw.sample_rate_hz = 2e6;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.02);
  for (std::size_t i = 0; i < 2'000'000 / 4; ++i) {
    const double t = static_cast<double>(i) / 2e6;
    raw.samples.push_back(Complex(0.05, 0.0) + std::polar(1.0, kTwoPi * 3.0 * t) + Complex(g(rng), g(rng)));
  }
  const auto pts = sanitize_stream(raw, SanitizeConfig{});
  REQUIRE(pts.size() == 25);
  CHECK(pts[1].t_s - pts[0].t_s == doctest::Approx(0.01));
  CHECK(pts[0].t_s == doctest::Approx(0.005));
}

TEST_CASE("window-level pipeline and config validation") {
  std::vector<Complex> raw(20000, Complex(0.1, 0.1));
  CHECK(error_of([&] { sanitize_window(raw, 2e6, SanitizeConfig{}); }).code() == Errc::EmptyFrame);
  CHECK(error_of([&] { sanitize_window({}, 2e6, SanitizeConfig{}); }).code() == Errc::EmptyFrame);
  SanitizeConfig bad;
  bad.lof_threshold = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SanitizeConfig{};
  bad.bias_k = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SanitizeConfig{};
  bad.origin_radius = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
