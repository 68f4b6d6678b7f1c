#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ambient/types.hpp"

namespace ambient {

struct KMeansResult {
  std::vector<int> assignment;    // cluster index per point
  std::vector<Complex> centroids;
  std::vector<std::size_t> sizes;
  int iterations = 0;
  double distortion = 0.0;        // sum of squared distances to assigned centroid
};

inline constexpr int kKMeansMaxIterations = 100;
inline constexpr int kKMeansRestarts = 10;

// Lloyd's iteration from seeded k-means++ starts on points in the IQ plane.
// Each start stops at an assignment fixpoint or after kKMeansMaxIterations;
// the start with the lowest distortion wins (earlier start on ties). Ties in the
// assignment step go to the lower cluster index; a cluster that empties is
// re-seeded with the point farthest from its current centroid.
KMeansResult kmeans(std::span<const Complex> points, std::size_t k, std::uint64_t seed,
                    int restarts = kKMeansRestarts);

}  // namespace ambient
