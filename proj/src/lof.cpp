#include "ambient/lof.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <string>
#include <utility>

#include "ambient/error.hpp"
#include "ambient/parallel.hpp"

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace ambient {

namespace {

using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using Entry = std::pair<BPoint, std::size_t>;
using Neighbor = std::pair<double, std::size_t>;

void keep_k_smallest(std::vector<Neighbor>& cand, std::size_t k) {
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  cand.resize(k);
}

std::vector<std::size_t> indices_of(const std::vector<Neighbor>& nb) {
  std::vector<std::size_t> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) out[i] = nb[i].second;
  return out;
}

std::vector<std::vector<std::size_t>> knn_brute(std::span<const Complex> pts, std::size_t k) {
  std::vector<std::vector<std::size_t>> table(pts.size());
  std::vector<Neighbor> cand;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cand.clear();
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) cand.emplace_back(std::abs(pts[i] - pts[j]), j);
    keep_k_smallest(cand, k);
    table[i] = indices_of(cand);
  }
  return table;
}

std::vector<std::vector<std::size_t>> knn_rtree(std::span<const Complex> pts, std::size_t k) {
  std::vector<Entry> entries;
  entries.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) entries.emplace_back(BPoint(pts[i].real(), pts[i].imag()), i);
  const bgi::rtree<Entry, bgi::quadratic<16>> tree(entries.begin(), entries.end());

  std::vector<std::vector<std::size_t>> table(pts.size());
  const auto n = static_cast<std::ptrdiff_t>(pts.size());
  ErrorSlot err;
#pragma omp parallel
  {
    std::vector<Entry> hits;
    std::vector<Neighbor> cand;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      try {
        const auto i = static_cast<std::size_t>(ii);
        const Complex p = pts[i];
        // Upper bound on the k-th neighbour distance from the k+1 nearest
        // entries (one of which may be the point itself).
        hits.clear();
        tree.query(bgi::nearest(BPoint(p.real(), p.imag()), static_cast<unsigned>(k + 1)),
                   std::back_inserter(hits));
        cand.clear();
        for (const auto& h : hits)
          if (h.second != i) cand.emplace_back(std::abs(p - pts[h.second]), h.second);
        keep_k_smallest(cand, k);
        const double radius = cand.back().first;
        // Re-collect everything inside that radius so index tie-breaking
        // matches the brute-force path exactly.
        const double pad = radius * (1.0 + 1e-12) + 1e-300;
        const BBox box(BPoint(p.real() - pad, p.imag() - pad), BPoint(p.real() + pad, p.imag() + pad));
        hits.clear();
        tree.query(bgi::intersects(box), std::back_inserter(hits));
        cand.clear();
        for (const auto& h : hits) {
          if (h.second == i) continue;
          const double d = std::abs(p - pts[h.second]);
          if (d <= radius) cand.emplace_back(d, h.second);
        }
        keep_k_smallest(cand, k);
        table[i] = indices_of(cand);
      } catch (...) {
        err.capture();
      }
    }
  }
  err.rethrow_if_set();
  return table;
}

}  // namespace

std::vector<std::vector<std::size_t>> knn_table(std::span<const Complex> points, std::size_t k, Exec exec) {
  if (k == 0) fail(Errc::InvalidArgument, "k must be >= 1");
  if (points.size() <= k)
    fail(Errc::TooFewPoints, std::to_string(points.size()) + " points for k=" + std::to_string(k));
  return exec == Exec::Serial ? knn_brute(points, k) : knn_rtree(points, k);
}

std::vector<double> lof_scores(std::span<const Complex> points, std::size_t k, Exec exec) {
  const auto nbrs = knn_table(points, k, exec);
  const std::size_t n = points.size();
  const auto kd = static_cast<double>(k);

  std::vector<double> k_distance(n);
  for (std::size_t i = 0; i < n; ++i) k_distance[i] = std::abs(points[i] - points[nbrs[i].back()]);

  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t o : nbrs[i]) reach += std::max(k_distance[o], std::abs(points[i] - points[o]));
    lrd[i] = 1.0 / (reach / kd + 1e-10);
  }

  std::vector<double> lof(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t o : nbrs[i]) acc += lrd[o];
    lof[i] = acc / kd / lrd[i];
  }
  return lof;
}

}  // namespace ambient
