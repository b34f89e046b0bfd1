#pragma once

// Ground-truth mixture parameters and seeded synthetic data.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "agmm/numkit.hpp"

namespace agmm {

// Either one shared covariance (homogeneous) or one per cluster.
class CovarianceSpec {
 public:
  CovarianceSpec() = default;

  static CovarianceSpec homogeneous(Matrix sigma);
  static CovarianceSpec heterogeneous(std::vector<Matrix> sigmas);

  bool is_homogeneous() const noexcept { return homogeneous_; }
  // Covariance of cluster a (the shared matrix when homogeneous).
  const Matrix& of(std::size_t a) const { return homogeneous_ ? sigmas_.front() : sigmas_.at(a); }
  const std::vector<Matrix>& matrices() const noexcept { return sigmas_; }
  std::size_t dim() const noexcept { return sigmas_.empty() ? 0 : sigmas_.front().rows(); }

  // Same matrices reported per cluster; a heterogeneous spec is returned unchanged.
  CovarianceSpec as_heterogeneous(std::size_t k) const;

  friend bool operator==(const CovarianceSpec&, const CovarianceSpec&) = default;

 private:
  bool homogeneous_ = true;
  std::vector<Matrix> sigmas_;
};

struct GmmParams {
  std::size_t k = 0;
  std::size_t d = 0;
  Matrix centers;  // k x d, row a is the center of cluster a
  CovarianceSpec covariance;

  Vector center(std::size_t a) const {
    auto r = centers.row(a);
    return {r.begin(), r.end()};
  }

  friend bool operator==(const GmmParams&, const GmmParams&) = default;
};

// Cluster assignment, 0-based.
struct LabelVector {
  std::vector<int> values;

  LabelVector() = default;
  explicit LabelVector(std::vector<int> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  int operator[](std::size_t j) const noexcept { return values[j]; }
  int& operator[](std::size_t j) noexcept { return values[j]; }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

struct Dataset {
  Matrix y;  // n x d
  std::optional<LabelVector> truth;
  std::optional<GmmParams> params;

  std::size_t n() const noexcept { return y.rows(); }
  std::size_t d() const noexcept { return y.cols(); }
};

// Throws InvalidParams naming the first invariant that fails: k >= 2,
// distinct centers, matching dimensions, symmetric PD covariances.
void validate(const GmmParams& params);

// Structural checks only (allows k == 1); used for sampling.
void validate_structure(const GmmParams& params);

// Throws InvalidArgument unless every label lies in [0, k).
void check_labels(const LabelVector& z, std::size_t k);

// Y_j = theta_{z_j} + Sigma_{z_j}^{1/2} w_j with w_j ~ N(0, I) drawn from a
// Philox stream seeded with `seed`, row by row.
Dataset sample(const GmmParams& params, const LabelVector& assignment, std::uint64_t seed);

// Contiguous blocks 0..k-1; the first n mod k clusters get one extra point.
LabelVector balanced_assignment(std::size_t n, std::size_t k);

// Haar-distributed orthogonal matrix: Gram-Schmidt of a standard Gaussian
// matrix with R's diagonal kept positive.
Matrix random_orthogonal(std::size_t d, std::uint64_t seed);

// Endpoint-inclusive equal spacing.
Vector linspace(double lo, double hi, std::size_t count);

// Homogeneous benchmark: d=50, k=30, Sigma = U^T diag(linspace(0.5, 8)) U,
// mutually orthogonal centers of norm 9.
GmmParams make_sim1(std::uint64_t seed);

// Heterogeneous benchmark: d=5, k=3. Sigma_1 = I, Sigma_2 = diag(linspace(0.5, 8)),
// Sigma_3 = U^T Lambda_3 U with Lambda_3 ~ U[0.5, 2]; theta_1 random unit vector,
// theta_2 = theta_1 + 5 e_1, theta_3 = theta_2 + v with ||v|| = 10.
GmmParams make_sim2(std::uint64_t seed);

}  // namespace agmm
