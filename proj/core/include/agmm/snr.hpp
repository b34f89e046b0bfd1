#pragma once

// Separation functionals: minimum center gap, SNR for a shared covariance,
// and SNR' for cluster-specific covariances.

#include <cstddef>
#include <optional>
#include <vector>

#include "agmm/model.hpp"

namespace agmm {

// Region {x : b.x + 0.5 x^T A x + c <= 0} in coordinates whitened by Sigma_a:
//   A = Sigma_a^{1/2} Sigma_b^{-1} Sigma_a^{1/2} - I
//   b = Sigma_a^{1/2} Sigma_b^{-1} (theta_a - theta_b)
//   c = 0.5 (theta_a - theta_b)^T Sigma_b^{-1} (theta_a - theta_b)
//       - 0.5 log|Sigma_a| + 0.5 log|Sigma_b|
// A point x drawn from cluster a (as theta_a + Sigma_a^{1/2} x) lies in the
// region exactly when the optimal two-class QDA rule sends it to b.
struct QuadraticBoundary {
  Matrix a_mat;
  Vector b_vec;
  double c = 0.0;

  std::size_t dim() const noexcept { return b_vec.size(); }
  double value(std::span<const double> x) const;
  bool contains(std::span<const double> x) const { return value(x) <= 0.0; }
};

enum class MinNormStatus {
  Ok,            // boundary point found
  OriginInside,  // g(0) <= 0, minimum is 0
  EmptyRegion,   // region is empty, value = +infinity
};

struct MinNormResult {
  Vector x_star;
  double value = 0.0;  // ||x_star||
  MinNormStatus status = MinNormStatus::Ok;
  bool perturbed = false;  // hard case resolved by perturbing b
};

struct SnrReport {
  double delta = 0.0;
  std::optional<double> snr;                   // shared-covariance models only
  std::vector<std::vector<double>> snr_pairs;  // [a][b], 0 on the diagonal
  double snr_prime = 0.0;
  std::vector<std::vector<Vector>> witnesses;  // minimising x for each (a, b)
};

// min_{a != b} ||theta_a - theta_b||.
double min_center_gap(const GmmParams& params);

// min_{a != b} ||Sigma^{-1/2} (theta_a - theta_b)||. Requires a homogeneous covariance.
double snr_homogeneous(const GmmParams& params);

QuadraticBoundary boundary(const GmmParams& params, std::size_t a, std::size_t b);

inline constexpr double kDefaultBoundaryTol = 1e-10;

// Minimum-norm point of the region described by qb. Throws NumericalFailure
// when no stationary point meets |g(x)| <= tol * max(1, |c|).
MinNormResult min_norm_on_boundary(const QuadraticBoundary& qb, double tol = kDefaultBoundaryTol);

// Pairwise SNR'_{a,b} = 2 min_{x in B_{a,b}} ||x|| and their minimum. Empty
// regions give +infinity and are skipped by the minimum.
SnrReport snr_hetero(const GmmParams& params);

// Delta, SNR (when homogeneous) and SNR' in one report.
SnrReport snr_report(const GmmParams& params);

// Brute-force upper bound on min ||x|| for d <= 3: scan a grid of
// `resolution` points per axis over [-radius, radius]^d, then rescan a
// window of +-2 cells around the best point of every near-optimal patch at
// the same resolution. Returns +infinity if no grid point is feasible.
double grid_oracle(const QuadraticBoundary& qb, double radius, std::size_t resolution);

// Closed-form envelope for SNR'_{a,b} in terms of ||theta_a - theta_b|| and the
// global eigenvalue range [lambda_min, lambda_max] of all covariances.
struct SnrPrimeBounds {
  double lower = 0.0;
  double upper = 0.0;
};
SnrPrimeBounds snr_prime_bounds(double gap, double lambda_min, double lambda_max, std::size_t d);

}  // namespace agmm
