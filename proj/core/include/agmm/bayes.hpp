#pragma once

// Optimal two-class Gaussian decision rules and their Monte-Carlo testing error.

#include <cstdint>
#include <span>

#include "agmm/model.hpp"

namespace agmm {

// H0: X ~ N(theta0, sigma0) against H1: X ~ N(theta1, sigma1).
struct PairHypothesis {
  Vector theta0;
  Vector theta1;
  Matrix sigma0;
  Matrix sigma1;

  static PairHypothesis from_params(const GmmParams& params, std::size_t a, std::size_t b);
};

// Precomputed rule; decide() returns 1 for H1. Ties go to H1.
class DiscriminantRule {
 public:
  enum class Kind { Linear, Quadratic };

  DiscriminantRule(const PairHypothesis& hyp, Kind kind);

  int decide(std::span<const double> x) const;
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
  // Linear: 1 iff w.x >= offset, w = 2 Sigma^{-1}(theta1 - theta0),
  //         offset = theta1^T Sigma^{-1} theta1 - theta0^T Sigma^{-1} theta0.
  Vector w_;
  double offset_ = 0.0;
  // Quadratic: Cholesky factors and log-determinants of both covariances.
  Matrix l0_, l1_;
  double logdet0_ = 0.0, logdet1_ = 0.0;
  Vector theta0_, theta1_;
};

// 1 iff 2 (theta1 - theta0)^T Sigma^{-1} x >= theta1^T Sigma^{-1} theta1 - theta0^T Sigma^{-1} theta0.
// Uses hyp.sigma0; throws InvalidArgument when sigma0 != sigma1.
int lda_decide(std::span<const double> x, const PairHypothesis& hyp);

// 1 iff log|S0| + (x-theta0)^T S0^{-1} (x-theta0) >= log|S1| + (x-theta1)^T S1^{-1} (x-theta1).
int qda_decide(std::span<const double> x, const PairHypothesis& hyp);

struct McError {
  double total_error = 0.0;  // P_H0(decide 1) + P_H1(decide 0)
  double std_error = 0.0;    // binomial standard error of the sum
  double type1 = 0.0;
  double type2 = 0.0;
};

// trials draws under each hypothesis; Linear when the covariances are
// identical, Quadratic otherwise (or as forced by `kind`).
McError mc_pair_error(const PairHypothesis& hyp, std::size_t trials, std::uint64_t seed);
McError mc_pair_error(const PairHypothesis& hyp, std::size_t trials, std::uint64_t seed,
                      DiscriminantRule::Kind kind);

// exp(-snr^2 / 8).
double minimax_exponent_bound(double snr_value);

}  // namespace agmm
