#include "agmm/bayes.hpp"

#include <cmath>

#include "agmm/error.hpp"
#include "agmm/rng.hpp"

namespace agmm {

PairHypothesis PairHypothesis::from_params(const GmmParams& params, std::size_t a, std::size_t b) {
  if (a >= params.k || b >= params.k || a == b)
    fail(ErrorKind::InvalidArgument, "pair indices must be distinct and below k");
  return {params.center(a), params.center(b), params.covariance.of(a), params.covariance.of(b)};
}

namespace {

void check_dims(const PairHypothesis& hyp) {
  const std::size_t d = hyp.theta0.size();
  if (d == 0 || hyp.theta1.size() != d || hyp.sigma0.rows() != d || hyp.sigma0.cols() != d ||
      hyp.sigma1.rows() != d || hyp.sigma1.cols() != d)
    fail(ErrorKind::InvalidArgument, "inconsistent hypothesis dimensions");
}

double mahalanobis2(const Matrix& l, std::span<const double> x, std::span<const double> center) {
  const Vector w = solve_lower(l, subtract(x, center));
  return dot(w, w);
}

}  // namespace

DiscriminantRule::DiscriminantRule(const PairHypothesis& hyp, Kind kind) : kind_(kind) {
  check_dims(hyp);
  if (kind == Kind::Linear) {
    if (!(hyp.sigma0 == hyp.sigma1))
      fail(ErrorKind::InvalidArgument, "linear rule needs a shared covariance");
    const Matrix inv = spd_inverse(hyp.sigma0);
    const Vector a0 = inv * hyp.theta0;
    const Vector a1 = inv * hyp.theta1;
    w_.resize(hyp.theta0.size());
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = 2.0 * (a1[i] - a0[i]);
    offset_ = dot(hyp.theta1, a1) - dot(hyp.theta0, a0);
  } else {
    l0_ = chol_lower(hyp.sigma0);
    l1_ = chol_lower(hyp.sigma1);
    logdet0_ = log_det_spd(hyp.sigma0);
    logdet1_ = log_det_spd(hyp.sigma1);
    theta0_ = hyp.theta0;
    theta1_ = hyp.theta1;
  }
}

int DiscriminantRule::decide(std::span<const double> x) const {
  if (kind_ == Kind::Linear) return dot(w_, x) >= offset_ ? 1 : 0;
  const double s0 = logdet0_ + mahalanobis2(l0_, x, theta0_);
  const double s1 = logdet1_ + mahalanobis2(l1_, x, theta1_);
  return s0 >= s1 ? 1 : 0;
}

int lda_decide(std::span<const double> x, const PairHypothesis& hyp) {
  return DiscriminantRule(hyp, DiscriminantRule::Kind::Linear).decide(x);
}

int qda_decide(std::span<const double> x, const PairHypothesis& hyp) {
  return DiscriminantRule(hyp, DiscriminantRule::Kind::Quadratic).decide(x);
}

McError mc_pair_error(const PairHypothesis& hyp, std::size_t trials, std::uint64_t seed) {
  const auto kind = hyp.sigma0 == hyp.sigma1 ? DiscriminantRule::Kind::Linear
                                             : DiscriminantRule::Kind::Quadratic;
  return mc_pair_error(hyp, trials, seed, kind);
}

McError mc_pair_error(const PairHypothesis& hyp, std::size_t trials, std::uint64_t seed,
                      DiscriminantRule::Kind kind) {
  if (trials == 0) fail(ErrorKind::InvalidArgument, "mc_pair_error needs trials > 0");
  const DiscriminantRule rule(hyp, kind);
  const std::size_t d = hyp.theta0.size();

  auto count_decisions = [&](const Vector& center, const Matrix& sigma, std::uint64_t stream,
                             int wanted) {
    const Matrix root = chol_lower(sigma);
    Philox4x32 rng(derive_seed(seed, stream, StreamTag::MonteCarlo));
    Vector w(d), x(d);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      rng.fill_normal(w);
      for (std::size_t i = 0; i < d; ++i) {
        double v = center[i];
        for (std::size_t j = 0; j <= i; ++j) v += root(i, j) * w[j];
        x[i] = v;
      }
      if (rule.decide(x) == wanted) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
  };

  McError out;
  out.type1 = count_decisions(hyp.theta0, hyp.sigma0, 0, 1);
  out.type2 = count_decisions(hyp.theta1, hyp.sigma1, 1, 0);
  out.total_error = out.type1 + out.type2;
  const double n = static_cast<double>(trials);
  out.std_error = std::sqrt(out.type1 * (1.0 - out.type1) / n + out.type2 * (1.0 - out.type2) / n);
  return out;
}

double minimax_exponent_bound(double snr_value) {
  if (snr_value < 0.0) fail(ErrorKind::InvalidArgument, "snr must be non-negative");
  return std::exp(-snr_value * snr_value / 8.0);
}

}  // namespace agmm
