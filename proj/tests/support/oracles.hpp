#pragma once

// Independent reference computations used only by the tests.

#include <cstdint>
#include <vector>

#include "agmm/model.hpp"
#include "agmm/rng.hpp"
#include "agmm/snr.hpp"

namespace agmm::testing {

struct BruteForceMatch {
  std::size_t mismatches = 0;
  std::vector<int> mapping;  // lexicographically smallest optimal mapping
};

// Enumerates all k! bijections in lexicographic order.
BruteForceMatch brute_force_match(const LabelVector& z, const LabelVector& zstar, std::size_t k);

// Standard normal CDF.
double normal_cdf(double x);

// Grid minimum of ||x|| over the region with an automatically chosen box:
// the radius doubles until a coarse grid finds a feasible point, then a
// fine grid of `resolution` points per axis scans a box just larger than
// the coarse value.
double refined_grid_min(const QuadraticBoundary& qb, std::size_t resolution = 400);

// Q diag(eigs) Q^T with Haar Q.
Matrix random_spd(std::size_t d, double lo, double hi, Philox4x32& rng);
Vector random_direction(std::size_t d, Philox4x32& rng);
LabelVector random_labels(std::size_t n, std::size_t k, Philox4x32& rng);

// Two-cluster boundary with covariance eigenvalues in [lo, hi] and center
// gap length in [gap_lo, gap_hi].
QuadraticBoundary random_boundary(std::size_t d, double lo, double hi, double gap_lo, double gap_hi,
                                  Philox4x32& rng);

// k-cluster heterogeneous params with the same ranges.
GmmParams random_hetero_params(std::size_t k, std::size_t d, double lo, double hi, double gap_lo,
                               double gap_hi, Philox4x32& rng);

}  // namespace agmm::testing
