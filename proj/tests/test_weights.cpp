// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "skdv/errors.hpp"
#include "skdv/weights.hpp"

namespace skdv {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Weight, AtanDeltasMatchAnalyticExtrema) {
  const double ell = 5.0;
  const Grid g(128, 40.0);
  const WeightFunction w = make_weight("atan", ell, 10.0, g);
  // Analytic extrema of the derivatives of atan(x / ell), attained inside the box.
  const double d1 = 1.0 / ell;
  const double d2 = 9.0 / (8.0 * std::sqrt(3.0)) / (ell * ell);
  const double d3 = 2.0 / (ell * ell * ell);
  EXPECT_NEAR(w.delta(1), 1.1 * d1, 1e-6 * d1);
  EXPECT_NEAR(w.delta(2), 1.1 * d2, 1e-4 * d2);
  EXPECT_NEAR(w.delta(3), 1.1 * d3, 1e-6 * d3);
  const double pmin = 2.0 - std::atan(20.0 / ell);
  EXPECT_NEAR(w.delta(0), 0.9 * pmin, 1e-12);
  EXPECT_GE((w.lambda_cap() - 2.0) * w.delta(2), w.delta(3));
}

TEST(Weight, AtanLowerBoundApproachesInfimumOnWideBox) {
  const Grid g(1024, 4000.0);
  const WeightFunction w = make_weight("atan", 5.0, 10.0, g);
  EXPECT_NEAR(w.delta(0) / kDeltaLowerMargin, 2.0 - kPi / 2.0, 3e-3);
  EXPECT_GT(w.delta(0), 0.0);
}

TEST(Weight, ConditionsHoldOnGrid) {
  for (const char* profile : {"atan", "const"}) {
    const Grid g(256, 40.0);
    const WeightFunction w = make_weight(profile, 5.0, 10.0, g);
    const Field p = w.profile().sample(g);
    for (std::size_t j = 0; j < g.n(); ++j) {
      EXPECT_GT(p[j], w.delta(0)) << profile;
      if (j > 0) EXPECT_GE(p[j], p[j - 1]) << profile;
    }
    for (int n = 1; n <= 3; ++n) {
      const Field d = w.profile().sample(g, n);
      EXPECT_LE(d.max_abs(), w.delta(n)) << profile << " order " << n;
    }
    EXPECT_GT(w.delta(0), 0.0);
    EXPECT_GE((w.lambda_cap() - 2.0) * w.delta(2), w.delta(3));
  }
}

TEST(Weight, ConstantHasZeroDerivativeBounds) {
  const WeightFunction w = make_weight("const", 1.0, 10.0, Grid(64, 10.0));
  EXPECT_EQ(w.delta(1), 0.0);
  EXPECT_EQ(w.delta(2), 0.0);
  EXPECT_EQ(w.delta(3), 0.0);
  EXPECT_NEAR(w.delta(0), 0.9, 1e-15);
}

TEST(Weight, LambdaAtMostTwoRejected) {
  const Grid g(64, 40.0);
  EXPECT_THROW(make_weight("atan", 5.0, 2.0, g), InvariantError);
  EXPECT_THROW(make_weight("const", 1.0, 1.5, g), InvariantError);
}

TEST(Weight, DecreasingOrNonPositiveRejected) {
  const Grid g(64, 40.0);
  EXPECT_THROW(make_weight("atan", -5.0, 10.0, g), InvariantError);
  EXPECT_THROW(make_weight("const", -1.0, 10.0, g), InvariantError);
  EXPECT_THROW(make_weight("const", 0.0, 10.0, g), InvariantError);
}

TEST(Weight, ConditionFourCanFail) {
  // Very sharp atan: delta3 grows like 1/ell^3 and outruns (lambda - 2) delta2.
  const Grid g(1024, 40.0);
  EXPECT_THROW(make_weight("atan", 0.1, 3.0, g), InvariantError);
}

TEST(Weight, UnknownProfileIsConfigError) {
  EXPECT_THROW(make_weight("gauss", 1.0, 10.0, Grid(64, 1.0)), ConfigError);
}

TEST(Profile, DerivativesMatchFiniteDifferences) {
  const WeightProfile profiles[] = {WeightProfile::atan(3.0), WeightProfile::periodic_sine(10.0, 0.5, 2.0)};
  const double h = 1e-4;
  for (const auto& p : profiles) {
    for (double x : {-4.0, -0.3, 0.0, 1.7, 6.0}) {
      for (int n = 1; n <= 4; ++n) {
        const double fd = (p.eval(x + h, n - 1) - p.eval(x - h, n - 1)) / (2 * h);
        EXPECT_NEAR(p.eval(x, n), fd, 1e-6) << p.name() << " order " << n << " x " << x;
      }
    }
  }
}

TEST(Theta, FlatRegions) {
  EXPECT_EQ(theta(0.0), 1.0);
  EXPECT_EQ(theta(0.5), 1.0);
  EXPECT_EQ(theta(1.0), 1.0);
  EXPECT_EQ(theta(2.0), 0.0);
  EXPECT_EQ(theta(3.0), 0.0);
  EXPECT_EQ(theta(1e6), 0.0);
}

TEST(Theta, InteriorIsMonotoneBridge) {
  const double mid = theta(1.5);
  EXPECT_GT(mid, 0.0);
  EXPECT_LT(mid, 1.0);
  EXPECT_GE(theta(1.4), mid);
  EXPECT_GE(mid, theta(1.6));
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = theta(1.0 + i / 1000.0);
    EXPECT_LE(v, prev);
    EXPECT_GE(v, 0.0);
    prev = v;
  }
}

TEST(Theta, DerivativeVanishesAtJunctions) {
  const double h = 1e-3;
  for (double xi : {1.0, 2.0}) {
    const double d = (theta(xi + h) - theta(xi - h)) / (2 * h);
    EXPECT_LT(std::abs(d), 1e-6) << xi;
  }
}

TEST(Theta, NegativeArgumentRejected) {
  EXPECT_THROW(theta(-0.1), PreconditionError);
  EXPECT_THROW(theta(std::nan("")), PreconditionError);
}

}  // namespace
}  // namespace skdv
