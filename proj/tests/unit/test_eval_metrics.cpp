#include <cmath>
#include <functional>
#include <random>

#include "ambient/error.hpp"
#include "ambient/eval_metrics.hpp"
#include "doctest.h"
#include "oracles/naive.hpp"

using namespace ambient;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no ambient::Error thrown");
  return Errc::InvalidArgument;
}

Mask mask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> px) {
  Mask m;
  m.rows = rows;
  m.cols = cols;
  m.pixels = std::move(px);
  return m;
}

KeypointInstance single(double err, double scale, double falloff) {
  KeypointInstance k;
  k.gt = {{0.0, 0.0}};
  k.pred = {{err, 0.0}};
  k.visibility = {2};
  k.scale = scale;
  k.falloff = {falloff};
  return k;
}

}  // namespace

TEST_CASE("iou fixtures") {
  const auto a = mask(2, 2, {1, 0, 1, 0}), b = mask(2, 2, {1, 1, 0, 0});
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(mask(1, 2, {1, 0}), mask(1, 2, {0, 1})) == 0.0);
  CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(a, b) == iou(b, a));
  CHECK(iou(Mask::empty(3, 3), Mask::empty(3, 3)) == 1.0);
  CHECK(iou(Mask::empty(2, 2), a) == 0.0);
  CHECK(code_of([&] { iou(a, Mask::empty(2, 3)); }) == Errc::RasterMismatch);
}

TEST_CASE("ap fixtures") {
  const std::vector<double> s = {0.9, 0.6, 0.4};
  const auto ap = ap_summary(s);
  REQUIRE(ap.ap_at.size() == 10);
  CHECK(ap.ap_at[0].first == 0.5);
  CHECK(ap.ap_at[0].second == doctest::Approx(2.0 / 3.0));
  CHECK(ap.mean == doctest::Approx(0.4));
  const std::vector<double> ones(5, 1.0), zeros(5, 0.0);
  CHECK(ap_summary(ones).mean == 1.0);
  CHECK(ap_summary(zeros).mean == 0.0);
  CHECK(ar_summary(s).mean == ap.mean);
  CHECK(code_of([] { ap_summary({}); }) == Errc::EmptyScoreList);
  const std::vector<double> bad = {1.5};
  CHECK_THROWS_AS(ap_summary(bad), Error);
}

TEST_CASE("ap is non-increasing in the threshold") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> s(1 + rng() % 20);
    for (auto& v : s) v = u(rng);
    const auto ap = ap_summary(s);
    for (std::size_t i = 1; i < ap.ap_at.size(); ++i) CHECK(ap.ap_at[i].second <= ap.ap_at[i - 1].second);
  }
}

TEST_CASE("thresholds") {
  const auto t = ap_thresholds();
  CHECK(t[0] == 0.5);
  CHECK(t[9] == 0.95);
}

TEST_CASE("oks fixtures") {
  CHECK(oks(single(0.0, 1.0, 1.0)) == 1.0);
  CHECK(oks(single(std::sqrt(2.0 * std::log(2.0)), 1.0, 1.0)) == doctest::Approx(0.5).epsilon(1e-9));
  auto hidden = single(1.0, 1.0, 1.0);
  hidden.visibility = {0};
  CHECK(code_of([&] { oks(hidden); }) == Errc::NoVisibleKeypoints);
}

TEST_CASE("oks is unchanged when error and scale scale together") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int it = 0; it < 50; ++it) {
    const double d = u(rng), s = u(rng), f = u(rng);
    CHECK(oks(single(d * f, s * f, 0.3)) == doctest::Approx(oks(single(d, s, 0.3))).epsilon(1e-12));
  }
}

TEST_CASE("default falloff") {
  const auto k17 = default_falloff(17);
  for (std::size_t i = 0; i < 17; ++i) CHECK(k17[i] == 2.0 * coco_sigmas()[i]);
  for (double v : default_falloff(5)) CHECK(v == 0.1);
}

TEST_CASE("pck fixtures") {
  KeypointInstance k;
  k.gt = {{10.0, 10.0}};
  k.pred = {{13.0, 10.0}};
  k.visibility = {2};
  k.bbox_h = 30.0;
  k.bbox_w = 40.0;
  k.scale = std::sqrt(1200.0);
  std::vector<KeypointInstance> list = {k};
  CHECK(pck(list, 0, 0.1) == 100.0);
  list[0].pred = {{15.0, 10.0}};
  CHECK(pck(list, 0, 0.1) == 100.0);
  list[0].pred = {{15.5, 10.0}};
  CHECK(pck(list, 0, 0.1) == 0.0);
  auto hidden = k;
  hidden.visibility = {0};
  hidden.pred = {{100.0, 100.0}};
  list = {k, hidden};
  CHECK(pck(list, 0, 0.1) == 100.0);
  std::vector<KeypointInstance> none = {hidden};
  CHECK(code_of([&] { pck(none, 0, 0.1); }) == Errc::NoVisibleKeypoints);
}

TEST_CASE("pck is non-decreasing in alpha") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<KeypointInstance> list(30);
  for (auto& k : list) {
    k.gt = {{u(rng), u(rng)}};
    k.pred = {{k.gt[0].x + 0.1 * u(rng), k.gt[0].y}};
    k.visibility = {2};
    k.bbox_h = 20 + u(rng);
    k.bbox_w = 20 + u(rng);
    k.scale = std::sqrt(k.bbox_h * k.bbox_w);
  }
  double prev = -1.0;
  for (double a = 0.01; a <= 0.2; a += 0.01) {
    const double v = pck(list, 0, a);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("batched oks matches one-by-one") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<KeypointInstance> list(40);
  for (auto& k : list) {
    for (int i = 0; i < 17; ++i) {
      k.gt.push_back({u(rng), u(rng)});
      k.pred.push_back({u(rng), u(rng)});
      k.visibility.push_back(2);
    }
    k.scale = 5.0 + u(rng);
  }
  const auto all = oks_batch(list);
  for (std::size_t i = 0; i < list.size(); ++i) CHECK(all[i] == oks(list[i]));
}

TEST_CASE("random instances agree with naive enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    const std::size_t rows = 1 + rng() % 5, cols = 1 + rng() % 5;
    auto a = Mask::empty(rows, cols), b = Mask::empty(rows, cols);
    std::vector<std::vector<int>> na(rows, std::vector<int>(cols)), nb = na;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        na[r][c] = u(rng) < 0.4;
        nb[r][c] = u(rng) < 0.4;
        a.pixels[r * cols + c] = static_cast<std::uint8_t>(na[r][c]);
        b.pixels[r * cols + c] = static_cast<std::uint8_t>(nb[r][c]);
      }
    CHECK(iou(a, b) == doctest::Approx(oracle::iou(na, nb)).epsilon(1e-12));
    std::vector<double> s(1 + rng() % 8);
    for (auto& v : s) v = std::round(u(rng) * 20.0) / 20.0;
    CHECK(std::abs(ap_summary(s).mean - oracle::mean_ap(s)) <= 1e-12);
  }
}

TEST_CASE("keypoint validation") {
  KeypointInstance k;
  k.gt = {{0, 0}, {1, 1}};
  k.pred = {{0, 0}};
  k.visibility = {2, 2};
  k.scale = 1.0;
  CHECK_THROWS_AS(k.validate(), Error);
  k.pred = {{0, 0}, {1, 1}};
  k.scale = 0.0;
  CHECK_THROWS_AS(oks(k), Error);
}
