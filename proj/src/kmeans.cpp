#include "ambient/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "ambient/error.hpp"

namespace ambient {

namespace {

std::vector<Complex> plus_plus_init(std::span<const Complex> pts, std::size_t k, std::mt19937_64& rng) {
  std::vector<Complex> centers;
  centers.reserve(k);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  centers.push_back(pts[pick(rng)]);

  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::norm(pts[i] - centers[0]);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(pts[chosen]);
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], std::norm(pts[i] - centers.back()));
  }
  return centers;
}

int nearest(const Complex& p, const std::vector<Complex>& centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = std::norm(p - centers[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult lloyd(std::span<const Complex> points, std::size_t k, std::mt19937_64& rng) {
  KMeansResult res;
  res.centroids = plus_plus_init(points, k, rng);
  res.assignment.assign(points.size(), -1);

  for (int iter = 0; iter < kKMeansMaxIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = nearest(points[i], res.centroids);
      if (c != res.assignment[i]) {
        res.assignment[i] = c;
        changed = true;
      }
    }
    res.iterations = iter + 1;
    if (!changed) break;

    std::vector<Complex> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[res.assignment[i]] += points[i];
      ++counts[res.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        res.centroids[c] = sums[c] / static_cast<double>(counts[c]);
        continue;
      }
      // Re-seed with the point farthest from its own centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = std::norm(points[i] - res.centroids[res.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      res.centroids[c] = points[far];
    }
  }

  res.sizes.assign(k, 0);
  res.distortion = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++res.sizes[res.assignment[i]];
    res.distortion += std::norm(points[i] - res.centroids[res.assignment[i]]);
  }
  return res;
}

}  // namespace

KMeansResult kmeans(std::span<const Complex> points, std::size_t k, std::uint64_t seed, int restarts) {
  if (k == 0) fail(Errc::InvalidArgument, "k must be >= 1");
  if (restarts < 1) fail(Errc::InvalidArgument, "restarts must be >= 1");
  if (points.size() < k)
    fail(Errc::TooFewPoints, std::to_string(points.size()) + " points for k=" + std::to_string(k));

  std::mt19937_64 rng(seed);
  KMeansResult best = lloyd(points, k, rng);
  for (int r = 1; r < restarts; ++r) {
    auto next = lloyd(points, k, rng);
    if (next.distortion < best.distortion) best = std::move(next);
  }
  return best;
}

}  // namespace ambient
