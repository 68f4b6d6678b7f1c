#include "oracles/naive.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

namespace oracle {

namespace {
constexpr double c0 = 299792458.0;
const double pi = std::acos(-1.0);
}  // namespace

cd baseband(const std::vector<int>& ks, const std::vector<cd>& x, double fc, double df, cd beta,
            const std::vector<cd>& alpha, const std::vector<double>& dist_m) {
  cd total = 0.0;
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    const double tau = dist_m[l] / c0;
    cd inner = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double ph = -2.0 * pi * (fc + ks[i] * df) * tau;
      inner += (x[i].real() * x[i].real() + x[i].imag() * x[i].imag()) * cd(std::cos(ph), std::sin(ph));
    }
    total += (beta.real() * beta.real() + beta.imag() * beta.imag()) * alpha[l] * inner;
  }
  return total;
}

std::vector<double> lof(const std::vector<cd>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> nb(n);
  std::vector<double> kdist(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) all.push_back({std::hypot(pts[i].real() - pts[j].real(), pts[i].imag() - pts[j].imag()), j});
    std::sort(all.begin(), all.end());
    for (std::size_t q = 0; q < k; ++q) nb[i].push_back(all[q].second);
    kdist[i] = all[k - 1].first;
  }
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (auto j : nb[i]) {
      const double d = std::hypot(pts[i].real() - pts[j].real(), pts[i].imag() - pts[j].imag());
      sum += std::max(kdist[j], d);
    }
    lrd[i] = 1.0 / (sum / static_cast<double>(k) + 1e-10);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (auto j : nb[i]) s += lrd[j];
    out[i] = s / static_cast<double>(k) / lrd[i];
  }
  return out;
}

double beam_power(const std::vector<cd>& delta, const std::vector<std::array<double, 3>>& pos, double lambda,
                  double theta, double phi) {
  const double ux = std::cos(phi) * std::cos(theta), uy = std::cos(phi) * std::sin(theta), uz = std::sin(phi);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double a = -2.0 * pi / lambda * (ux * pos[i][0] + uy * pos[i][1] + uz * pos[i][2]);
    // (cos a + j sin a) * (dr - j di)
    const double dr = delta[i].real(), di = delta[i].imag();
    re += std::cos(a) * dr + std::sin(a) * di;
    im += std::sin(a) * dr - std::cos(a) * di;
  }
  return std::sqrt(re * re + im * im);
}

double iou(const std::vector<std::vector<int>>& pred, const std::vector<std::vector<int>>& gt) {
  std::set<std::pair<std::size_t, std::size_t>> a, b, u;
  for (std::size_t r = 0; r < pred.size(); ++r)
    for (std::size_t c = 0; c < pred[r].size(); ++c) {
      if (pred[r][c]) a.insert({r, c});
      if (gt[r][c]) b.insert({r, c});
    }
  u = a;
  u.insert(b.begin(), b.end());
  if (u.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& p : a) inter += b.count(p);
  return static_cast<double>(inter) / static_cast<double>(u.size());
}

namespace {
double threshold(int i) { return (50.0 + 5.0 * i) / 100.0; }
}  // namespace

double ap_at(const std::vector<double>& scores, int threshold_index) {
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), threshold(threshold_index));
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

double mean_ap(const std::vector<double>& scores) {
  long long cleared = 0;
  for (double s : scores)
    for (int i = 0; i < 10; ++i) cleared += s >= threshold(i) ? 1 : 0;
  return static_cast<double>(cleared) / (10.0 * static_cast<double>(scores.size()));
}

double oks(const std::vector<Kp>& kps, double s, const std::vector<double>& k) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < kps.size(); ++i) {
    if (kps[i].v == 0) continue;
    const double dx = kps[i].px - kps[i].gx, dy = kps[i].py - kps[i].gy;
    num += std::exp(-(dx * dx + dy * dy) / (2.0 * s * s * k[i] * k[i]));
    den += 1.0;
  }
  return num / den;
}

double pck(const std::vector<std::vector<Kp>>& instances, const std::vector<std::pair<double, double>>& boxes_hw,
           std::size_t keypoint, double alpha) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Kp& p = instances[i][keypoint];
    const double vis = p.v > 0 ? 1.0 : 0.0;
    const double diag = std::hypot(boxes_hw[i].first, boxes_hw[i].second);
    const double err = std::hypot(p.px - p.gx, p.py - p.gy);
    num += (err <= alpha * diag ? 1.0 : 0.0) * vis;
    den += vis;
  }
  return 100.0 * num / den;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
}

}  // namespace oracle
