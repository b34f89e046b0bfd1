#pragma once

// Initialisers (k-means++, vanilla Lloyd, spectral) and the covariance-adjusted
// Lloyd iterations for shared and cluster-specific covariances.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "agmm/model.hpp"

namespace agmm {

struct FitState {
  Matrix centers;             // k x d
  CovarianceSpec covariance;  // as used for the assignment (after any ridge)
  LabelVector labels;
  std::size_t iteration = 0;
};

// states[t-1] holds the estimates after iteration t. h_curve, when the data
// carries truth labels, has one more entry than states: h_curve[0] scores
// the initial labels.
struct FitTrace {
  LabelVector initial_labels;
  std::vector<FitState> states;
  std::vector<double> objective;
  std::optional<std::vector<double>> h_curve;
  std::optional<std::size_t> converged_at;
  std::size_t regularization_events = 0;
  std::size_t empty_cluster_events = 0;

  const LabelVector& final_labels() const {
    return states.empty() ? initial_labels : states.back().labels;
  }
};

struct LloydOptions {
  std::size_t max_iters = 100;
  std::size_t restarts = 10;
};

struct LloydResult {
  LabelVector labels;
  Matrix centers;
  std::size_t iterations = 0;  // center updates performed by the winning restart
  double sse = 0.0;
  std::size_t restart = 0;  // index of the winning restart
};

inline constexpr double kDefaultRidge = 1e-6;

// ceil(ln n), at least 1.
std::size_t default_iterations(std::size_t n);

// D^2-weighted seeding: first row uniform, each next row with probability
// proportional to its squared distance to the closest chosen row.
Matrix kmeanspp_seed(const Dataset& data, std::size_t k, std::uint64_t seed);

// Euclidean Lloyd from k-means++ seeds; best of `restarts` by SSE. Restart r
// uses derive_seed(seed, r, StreamTag::Restart).
LloydResult vanilla_lloyd(const Dataset& data, std::size_t k, std::uint64_t seed,
                          const LloydOptions& options = {});

// Project rows onto the top-min(k, d) right singular vectors, then run
// vanilla_lloyd in the projection.
LabelVector spectral_init(const Dataset& data, std::size_t k, std::uint64_t seed,
                          const LloydOptions& options = {});

// Shared covariance: means, pooled covariance (denominator n), Mahalanobis
// reassignment. Stops early once the labels repeat.
FitTrace adjusted_lloyd_homog(const Dataset& data, std::size_t k, const LabelVector& z0,
                              std::size_t max_iters, double ridge = kDefaultRidge);

// Cluster-specific covariances (per-cluster denominators), reassignment by
// Mahalanobis distance plus log-determinant.
FitTrace adjusted_lloyd_hetero(const Dataset& data, std::size_t k, const LabelVector& z0,
                               std::size_t max_iters, double ridge = kDefaultRidge);

// sum_j (Y_j - theta_{z_j})^T Sigma_{z_j}^{-1} (Y_j - theta_{z_j}) + log|Sigma_{z_j}|
double classification_objective(const Dataset& data, const FitState& state);

// Within-cluster sum of squares of `labels` around `centers`.
double within_cluster_sse(const Matrix& y, const LabelVector& labels, const Matrix& centers);

// Nearest center in Euclidean distance; ties go to the smaller index.
LabelVector assign_nearest(const Matrix& y, const Matrix& centers);

// Cluster means; empty clusters keep a zero row.
Matrix cluster_means(const Matrix& y, const LabelVector& labels, std::size_t k);

}  // namespace agmm
