#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccrm/tv.hpp"
#include "oracle.hpp"

using namespace ccrm;

TEST(TvValue, ConstantCubeIsZero) {
  EXPECT_EQ(tv_value(FrameCube(4, 5, 6, 0.37), {1.0, 2.0, 3.0}), 0.0);
}

TEST(TvValue, SingleHorizontalStep) {
  EXPECT_DOUBLE_EQ(tv_value(FrameCube(1, 1, 2, std::vector<double>{0.0, 1.0}), {1.0, 1.0, 1.0}), 1.0);
}

TEST(TvValue, AxisWeightsScaleTheirOwnTerm) {
  // Steps of 1 horizontally, 2 vertically and 4 temporally.
  FrameCube x(2, 2, 2);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) x.at(f, r, c) = 1.0 * c + 2.0 * r + 4.0 * f;
  EXPECT_DOUBLE_EQ(tv_value(x, {1.0, 0.0, 0.0}), 4 * 1.0);
  EXPECT_DOUBLE_EQ(tv_value(x, {0.0, 1.0, 0.0}), 4 * 2.0);
  EXPECT_DOUBLE_EQ(tv_value(x, {0.0, 0.0, 1.0}), 4 * 4.0);
  EXPECT_DOUBLE_EQ(tv_value(x, {0.5, 0.25, 2.0}), 2.0 + 2.0 + 32.0);
}

TEST(TvValue, MatchesNaiveSummation) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 9);
    const FrameCube x = oracle::random_cube(dim(rng), dim(rng), dim(rng), rng);
    const TvWeights w{0.3 + trial * 0.1, 1.0, 2.5};
    EXPECT_NEAR(tv_value(x, w), oracle::tv_naive(x, w), 1e-9);
  }
}

TEST(Gradient, ForwardDifferenceWithZeroAtLastIndex) {
  const FrameCube x(1, 1, 4, std::vector<double>{1.0, 4.0, 2.0, 7.0});
  std::vector<double> g(4);
  gradient(x, Axis::horizontal, g);
  EXPECT_EQ(g, (std::vector<double>{3.0, -2.0, 5.0, 0.0}));
}

TEST(Gradient, AdjointIdentityPerAxis) {
  std::mt19937_64 rng(32);
  const FrameCube x = oracle::random_cube(5, 6, 7, rng);
  const FrameCube p = oracle::random_cube(5, 6, 7, rng);
  for (Axis a : kAllAxes) {
    std::vector<double> dx(x.size()), dtp(x.size(), 0.0);
    gradient(x, a, dx);
    add_gradient_adjoint(x, a, p.data(), dtp);
    EXPECT_NEAR(oracle::dot(dx, p.data()), oracle::dot(x.data(), dtp), 1e-9);
  }
}

TEST(Shrink, ScalarDefinition) {
  EXPECT_NEAR(shrink(0.5, 0.2), 0.3, 1e-15);
  EXPECT_EQ(shrink(-0.1, 0.2), 0.0);
  EXPECT_NEAR(shrink(-0.5, 0.2), -0.3, 1e-15);
  EXPECT_EQ(shrink(0.2, 0.2), 0.0);
}

TEST(Shrink, ZeroThresholdIsIdentity) {
  const std::vector<double> z{-3.0, -0.0, 0.25, 9.5};
  EXPECT_EQ(shrink(std::span<const double>(z), 0.0), z);
}

TEST(Shrink, ArrayMatchesScalar) {
  const std::vector<double> z{-1.0, -0.15, 0.0, 0.1, 0.7};
  const std::vector<double> s = shrink(std::span<const double>(z), 0.2);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(s[i], shrink(z[i], 0.2));
}

TEST(Shrink, NegativeThresholdIsRejected) {
  const std::vector<double> z{1.0};
  EXPECT_THROW(shrink(std::span<const double>(z), -0.1), InvalidArgument);
}

// argmin over (v1, v2) of 1/2 (v1-a)^2 + 1/2 (v2-b)^2 + lambda |v2 - v1|:
// both move toward each other by min(lambda, |b-a|/2).
TEST(TvProx, TwoPixelClosedForm) {
  const struct {
    double a, b, lambda;
  } cases[] = {{0.0, 1.0, 0.1}, {0.0, 1.0, 0.6}, {2.0, -1.0, 0.25}, {0.3, 0.3, 1.0}, {-1.0, 4.0, 2.4}};
  for (const auto &k : cases) {
    const FrameCube w(1, 1, 2, std::vector<double>{k.a, k.b});
    const FrameCube v = tv_prox(w, k.lambda, {1.0, 1.0, 1.0}, 2000);
    const double move = std::min(k.lambda, std::abs(k.b - k.a) / 2.0);
    const double dir = k.b > k.a ? 1.0 : (k.b < k.a ? -1.0 : 0.0);
    EXPECT_NEAR(v.at(0, 0, 0), k.a + dir * move, 1e-6);
    EXPECT_NEAR(v.at(0, 0, 1), k.b - dir * move, 1e-6);
  }
}

TEST(TvProx, ZeroLambdaIsIdentity) {
  std::mt19937_64 rng(33);
  const FrameCube w = oracle::random_cube(3, 4, 5, rng);
  EXPECT_EQ(tv_prox(w, 0.0, {1.0, 1.0, 1.0}, 10), w);
}

TEST(TvProx, DecreasesProxObjective) {
  std::mt19937_64 rng(34);
  const FrameCube w = oracle::random_cube(4, 6, 6, rng);
  const TvWeights wt{1.0, 1.0, 3.0};
  const double lambda = 0.2;
  auto obj = [&](const FrameCube &v) {
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += 0.5 * (v.data()[i] - w.data()[i]) * (v.data()[i] - w.data()[i]);
    return d + lambda * oracle::tv_naive(v, wt);
  };
  const double at_w = obj(w);
  const double few = obj(tv_prox(w, lambda, wt, 5));
  const double many = obj(tv_prox(w, lambda, wt, 500));
  EXPECT_LT(few, at_w);
  EXPECT_LE(many, few + 1e-12);
}

TEST(TvProx, WarmStartMatchesLongerColdRun) {
  std::mt19937_64 rng(35);
  const FrameCube w = oracle::random_cube(3, 5, 5, rng);
  TvDual dual;
  FrameCube warm = w;
  for (int k = 0; k < 60; ++k) warm = tv_prox(w, 0.1, {1.0, 1.0, 1.0}, 10, dual);
  const FrameCube cold = tv_prox(w, 0.1, {1.0, 1.0, 1.0}, 3000);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(warm.data()[i], cold.data()[i], 1e-4);
}

TEST(TvProx, NegativeLambdaIsRejected) {
  EXPECT_THROW(tv_prox(FrameCube(1, 1, 2), -1.0, {1.0, 1.0, 1.0}, 5), InvalidArgument);
}
