#include <gtest/gtest.h>

#include <numeric>

#include "agmm/error.hpp"
#include "agmm/loss.hpp"
#include "agmm/snr.hpp"
#include "oracles.hpp"

using namespace agmm;

TEST(Misclustering, IdenticalLabelsScoreZero) {
  const LabelVector z({0, 1, 2, 2, 1});
  EXPECT_EQ(misclustering_rate(z, z, 3).rate, 0.0);
}

TEST(Misclustering, RelabelingScoresZero) {
  const LabelVector zstar({0, 0, 1, 1, 2, 2});
  const LabelVector z({2, 2, 0, 0, 1, 1});
  const auto r = misclustering_rate(z, zstar, 3);
  EXPECT_EQ(r.rate, 0.0);
  EXPECT_EQ(r.best.apply(z), zstar);
}

TEST(Misclustering, ConstantEstimateIsHalfWrong) {
  EXPECT_EQ(misclustering_rate(LabelVector({1, 1, 1, 1}), LabelVector({0, 0, 1, 1}), 2).rate, 0.5);
}

TEST(Misclustering, LengthMismatchThrows) {
  try {
    misclustering_rate(LabelVector({0, 1}), LabelVector({0}), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(Misclustering, SymmetricAndOnTheGrid) {
  Philox4x32 rng(8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + rng.uniform_index(5);
    const std::size_t n = 1 + rng.uniform_index(40);
    const LabelVector a = agmm::testing::random_labels(n, k, rng), b = agmm::testing::random_labels(n, k, rng);
    const auto ab = misclustering_rate(a, b, k), ba = misclustering_rate(b, a, k);
    EXPECT_EQ(ab.mismatches, ba.mismatches);
    EXPECT_EQ(ab.rate, static_cast<double>(ab.mismatches) / static_cast<double>(n));
  }
}

TEST(BestBijection, DiagonalDominantIsIdentity) {
  EXPECT_EQ(max_weight_bijection({{5, 1, 0}, {0, 4, 1}, {2, 0, 6}}).mapping, (std::vector<int>{0, 1, 2}));
}

TEST(BestBijection, AntiDiagonalIsReversal) {
  EXPECT_EQ(max_weight_bijection({{0, 0, 7}, {0, 7, 0}, {7, 0, 0}}).mapping, (std::vector<int>{2, 1, 0}));
}

TEST(BestBijection, TiesGoToLexicographicallySmallest) {
  EXPECT_EQ(max_weight_bijection({{1, 1}, {1, 1}}).mapping, (std::vector<int>{0, 1}));
  EXPECT_EQ(max_weight_bijection({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}).mapping, (std::vector<int>{0, 1, 2}));
  // Two optimal matchings of weight 6: (1,0,2) and (2,0,1); the first is smaller.
  EXPECT_EQ(max_weight_bijection({{0, 2, 2}, {2, 0, 0}, {0, 2, 2}}).mapping, (std::vector<int>{1, 0, 2}));
}

TEST(BestBijection, MatchesExhaustiveSearchIncludingTieBreak) {
  Philox4x32 rng(2);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 1 + rng.uniform_index(7);
    const std::size_t n = rng.uniform_index(31);
    const LabelVector z = agmm::testing::random_labels(n, k, rng), zstar = agmm::testing::random_labels(n, k, rng);
    const auto oracle = agmm::testing::brute_force_match(z, zstar, k);
    const auto fast = misclustering_rate(z, zstar, k);
    ASSERT_EQ(fast.mismatches, oracle.mismatches) << "instance " << t;
    ASSERT_EQ(fast.best.mapping, oracle.mapping) << "instance " << t;
  }
}

TEST(BestBijection, LargeKIsPermutationInvariant) {
  Philox4x32 rng(4);
  const std::size_t k = 30;
  LabelVector zstar = agmm::testing::random_labels(1200, k, rng);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  LabelVector z = zstar;
  for (int& v : z.values) v = perm[static_cast<std::size_t>(v)];
  z[0] = (z[0] + 1) % static_cast<int>(k);
  EXPECT_EQ(misclustering_rate(z, zstar, k).mismatches, 1u);
}

TEST(CenterLoss, Examples) {
  GmmParams p;
  p.k = 2;
  p.d = 2;
  p.centers = Matrix{{0, 0}, {3, 0}};
  p.covariance = CovarianceSpec::homogeneous(Matrix::identity(2));
  const LabelVector zstar({0, 1});
  EXPECT_EQ(center_loss(zstar, zstar, p), 0.0);
  EXPECT_EQ(center_loss(LabelVector({1, 1}), zstar, p), 9.0);
}

TEST(CenterLoss, BoundsAlignedMisclusteringRate) {
  // h <= l / (n Delta^2) once z is aligned by the h-optimal bijection.
  Philox4x32 rng(6);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + rng.uniform_index(5);
    const std::size_t n = 1 + rng.uniform_index(50);
    GmmParams p;
    p.k = k;
    p.d = 3;
    p.centers = Matrix(k, 3);
    for (double& v : p.centers.values()) v = 10.0 * rng.normal();
    p.covariance = CovarianceSpec::homogeneous(Matrix::identity(3));
    const LabelVector z = agmm::testing::random_labels(n, k, rng), zstar = agmm::testing::random_labels(n, k, rng);
    const auto r = misclustering_rate(z, zstar, k);
    const double delta = min_center_gap(p);
    const double l = center_loss(r.best.apply(z), zstar, p);
    EXPECT_LE(r.rate, l / (static_cast<double>(n) * delta * delta) * (1 + 1e-12));
  }
}
