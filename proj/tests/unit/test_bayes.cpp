#include <gtest/gtest.h>

#include <cmath>

#include "agmm/bayes.hpp"
#include "agmm/error.hpp"
#include "agmm/snr.hpp"
#include "oracles.hpp"

using namespace agmm;

namespace {

PairHypothesis shared(Vector t0, Vector t1, Matrix s) { return {std::move(t0), std::move(t1), s, s}; }

}  // namespace

TEST(Lda, CentersClassifyToThemselves) {
  const auto h = shared({0, 0}, {2, 1}, Matrix{{2, 0.3}, {0.3, 1}});
  EXPECT_EQ(lda_decide(h.theta0, h), 0);
  EXPECT_EQ(lda_decide(h.theta1, h), 1);
}

TEST(Lda, MidpointTiesToOne) {
  const auto h = shared({0, 0}, {2, 0}, Matrix::identity(2));
  EXPECT_EQ(lda_decide(Vector{1, 0}, h), 1);
}

TEST(Lda, WorkedExample) {
  // 2 * (2, 0) . (0.9, 5) = 3.6 < 4.
  EXPECT_EQ(lda_decide(Vector{0.9, 5}, shared({0, 0}, {2, 0}, Matrix::identity(2))), 0);
}

TEST(Lda, RejectsUnequalCovariances) {
  PairHypothesis h{{0}, {1}, Matrix{{1}}, Matrix{{2}}};
  try {
    lda_decide(Vector{0}, h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Qda, EqualCovariancesAgreeWithLda) {
  Philox4x32 rng(3);
  const auto h = shared({1, -1, 0}, {0, 2, 1}, agmm::testing::random_spd(3, 0.5, 8, rng));
  for (int i = 0; i < 10000; ++i) {
    Vector x(3);
    for (double& v : x) v = 4 * rng.normal();
    ASSERT_EQ(qda_decide(x, h), lda_decide(x, h));
  }
}

TEST(Qda, SecondCenterWithEqualDeterminants) {
  PairHypothesis h{{0, 0}, {3, 0}, Matrix{{2, 0}, {0, 0.5}}, Matrix{{0.5, 0}, {0, 2}}};
  EXPECT_EQ(qda_decide(h.theta1, h), 1);
}

TEST(Qda, MatchesBoundaryMembership) {
  // Whitened by Sigma_0, a point lies in B_{0,1} exactly when QDA sends it to 1.
  Philox4x32 rng(31);
  for (int inst = 0; inst < 5; ++inst) {
    const GmmParams p = agmm::testing::random_hetero_params(2, 3, 0.5, 8, 2, 6, rng);
    const PairHypothesis h = PairHypothesis::from_params(p, 0, 1);
    const QuadraticBoundary qb = boundary(p, 0, 1);
    const Matrix root = spd_sqrt(h.sigma0);
    std::size_t disagreements = 0;
    for (int i = 0; i < 10000; ++i) {
      Vector x(3);
      for (double& v : x) v = 2.5 * rng.normal();
      Vector y = root * x;
      for (std::size_t j = 0; j < 3; ++j) y[j] += h.theta0[j];
      if (qda_decide(y, h) != (qb.contains(x) ? 1 : 0)) ++disagreements;
    }
    EXPECT_EQ(disagreements, 0u);
  }
}

TEST(MonteCarlo, IdenticalHypothesesAreACoinFlip) {
  const auto h = shared({0, 0}, {0, 0}, Matrix::identity(2));
  const McError e = mc_pair_error(h, 10000, 1);
  // Every point ties and goes to H1: type1 = 1, type2 = 0.
  EXPECT_NEAR(e.total_error, 1.0, 3 * e.std_error + 1e-12);
}

TEST(MonteCarlo, LdaMatchesGaussianTail) {
  const auto h = shared({0, 0}, {4, 0}, Matrix::identity(2));
  const McError e = mc_pair_error(h, 1000000, 2);
  const double expect = 2 * agmm::testing::normal_cdf(-2.0);
  EXPECT_NEAR(expect, 0.04550, 1e-5);
  EXPECT_NEAR(e.total_error, expect, 3 * e.std_error);
}

TEST(MonteCarlo, QdaEqualCovariancesMatchesLda) {
  Philox4x32 rng(4);
  const auto h = shared({0, 0, 0}, {1, 2, 0.5}, agmm::testing::random_spd(3, 0.5, 2, rng));
  const McError lin = mc_pair_error(h, 200000, 5, DiscriminantRule::Kind::Linear);
  const McError quad = mc_pair_error(h, 200000, 6, DiscriminantRule::Kind::Quadratic);
  EXPECT_NEAR(lin.total_error, quad.total_error, 3 * std::hypot(lin.std_error, quad.std_error));
}

TEST(MonteCarlo, TypeOneErrorIsGaussianMassOfBoundaryRegion) {
  // Under H0 the whitened draw is standard normal, and QDA errs exactly on B_{0,1}.
  Philox4x32 rng(8);
  for (int inst = 0; inst < 3; ++inst) {
    const GmmParams p = agmm::testing::random_hetero_params(2, 2, 0.5, 4, 1, 3, rng);
    const McError e = mc_pair_error(PairHypothesis::from_params(p, 0, 1), 200000, 9 + inst);
    const QuadraticBoundary qb = boundary(p, 0, 1);
    const std::size_t trials = 200000;
    std::size_t inside = 0;
    Vector x(2);
    for (std::size_t t = 0; t < trials; ++t) {
      rng.fill_normal(x);
      if (qb.contains(x)) ++inside;
    }
    const double direct = static_cast<double>(inside) / trials;
    const double se = std::sqrt((e.type1 * (1 - e.type1) + direct * (1 - direct)) / trials);
    EXPECT_NEAR(e.type1, direct, 4 * se + 1e-12);
  }
}

TEST(MinimaxBound, Arithmetic) {
  EXPECT_EQ(minimax_exponent_bound(0.0), 1.0);
  EXPECT_NEAR(minimax_exponent_bound(4.0), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(minimax_exponent_bound(2 * std::sqrt(2 * std::log(10.0))), 0.1, 1e-14);
}
