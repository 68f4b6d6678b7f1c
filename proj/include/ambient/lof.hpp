#pragma once

#include <span>
#include <vector>

#include "ambient/types.hpp"

namespace ambient {

// Local outlier factor of every point, k nearest neighbours in the IQ plane.
// Neighbour ties are broken by index (insertion order), so each point has
// exactly k neighbours. lrd = 1 / (mean reach-dist + 1e-10), which keeps
// exact duplicates finite (their LOF comes out as 1).
//
//  Exec::Serial   brute-force O(n^2) neighbour search
//  Exec::Parallel R-tree candidate search, OpenMP over points
std::vector<double> lof_scores(std::span<const Complex> points, std::size_t k, Exec exec = Exec::Parallel);

// k nearest neighbours (ascending distance, then index) of every point.
std::vector<std::vector<std::size_t>> knn_table(std::span<const Complex> points, std::size_t k, Exec exec);

}  // namespace ambient
