// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <complex>
#include <bit>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "skdv/errors.hpp"
#include "skdv/field.hpp"

namespace skdv {
namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

double l2(const Field& f) { return std::sqrt(inner(f, f)); }

// Smooth periodic field with a handful of random low modes.
Field random_smooth(const Grid& g, std::mt19937_64& rng, int modes = 6) {
  std::normal_distribution<double> nd;
  std::vector<double> a(modes), b(modes);
  for (int k = 0; k < modes; ++k) {
    a[k] = nd(rng) / (1 + k);
    b[k] = nd(rng) / (1 + k);
  }
  const double L = g.length();
  return Field::from_function(g, [&](double x) {
    double v = 0.0;
    for (int k = 0; k < modes; ++k) v += a[k] * std::cos(2 * kPi * k * x / L) + b[k] * std::sin(2 * kPi * k * x / L);
    return v;
  });
}

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(Grid(4, 1.0), PreconditionError);
  EXPECT_THROW(Grid(12, 1.0), PreconditionError);
  EXPECT_THROW(Grid(16, 0.0), PreconditionError);
  EXPECT_NO_THROW(Grid(8, 1.0));
}

TEST(Grid, SpacingTimesCountIsLength) {
  const Grid g(64, 10.0);
  EXPECT_EQ(g.spacing() * 64, 10.0);
  EXPECT_EQ(g.x(0), -5.0);
}

TEST(Derivative, SingleModeExact) {
  const Grid g(64, 7.0);
  const double w = 2 * kPi / 7.0;
  const Field f = Field::from_function(g, [&](double x) { return std::sin(w * x); });
  const Field expect = Field::from_function(g, [&](double x) { return w * std::cos(w * x); });
  EXPECT_LT(max_abs_diff(derivative(f, 1), expect), 1e-12);
}

TEST(Derivative, ConstantHasZeroDerivatives) {
  const Grid g(32, 3.0);
  const Field c = Field::from_function(g, [](double) { return 4.2; });
  for (int order = 1; order <= 4; ++order) EXPECT_LT(derivative(c, order).max_abs(), 1e-13) << order;
}

TEST(Derivative, SecondOrderAgreesWithFiniteDifferences) {
  const std::size_t n = 256;
  const double L = 2 * kPi;
  const Grid g(n, L);
  const Field f = Field::from_function(g, [&](double x) { return std::exp(std::sin(2 * kPi * x / L)); });
  const double h = g.spacing();
  Field fd(g);
  for (std::size_t j = 0; j < n; ++j) fd[j] = (f[(j + 1) % n] - 2 * f[j] + f[(j + n - 1) % n]) / (h * h);
  const Field spectral = derivative(f, 2);
  EXPECT_LT(l2(spectral - fd) / l2(spectral), 1e-3);
}

TEST(Derivative, RejectsBadOrderAndNonFinite) {
  const Grid g(16, 1.0);
  Field f(g);
  EXPECT_THROW(derivative(f, 0), PreconditionError);
  EXPECT_THROW(derivative(f, 5), PreconditionError);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(derivative(f, 1), BlowUpError);
}

TEST(Derivative, CompositionMatchesHigherOrder) {
  std::mt19937_64 rng(7);
  const Grid g(128, 12.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Field f = random_smooth(g, rng);
    const Field d2 = derivative(f, 2);
    EXPECT_LT(l2(derivative(derivative(f, 1), 1) - d2) / l2(d2), 1e-10);
  }
}

TEST(Integrate, ClosedForms) {
  const Grid g10(64, 10.0);
  EXPECT_NEAR(integrate(Field::from_function(g10, [](double) { return 1.0; })), 10.0, 1e-13);
  EXPECT_NEAR(integrate(Field::from_function(g10, [](double x) { return std::sin(2 * kPi * x / 10.0); })), 0.0,
              1e-13);
  const Grid g(64, 2 * kPi);
  EXPECT_NEAR(integrate(Field::from_function(g, [](double x) { return std::sin(x) * std::sin(x); })), kPi, 1e-12);
}

TEST(Integrate, ExactDerivativesIntegrateToZero) {
  std::mt19937_64 rng(11);
  const Grid g(128, 20.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Field f = random_smooth(g, rng);
    for (int order = 1; order <= 4; ++order) EXPECT_LT(std::abs(integrate(derivative(f, order))), 1e-10);
  }
}

TEST(Spectrum, ParsevalAgainstDirectDft) {
  std::mt19937_64 rng(3);
  const std::size_t n = 64;
  const Grid g(n, 9.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Field f = random_smooth(g, rng, 10);
    // Direct O(n^2) DFT oracle: c_k = (1/n) sum_j f_j exp(-2 pi i j k / n).
    double coeff_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> c = 0.0;
      for (std::size_t j = 0; j < n; ++j) c += f[j] * std::polar(1.0, -2 * kPi * double(j * k) / double(n));
      coeff_sum += std::norm(c / double(n));
    }
    const double quad = integrate(hadamard(f, f));
    EXPECT_NEAR(quad, 9.0 * coeff_sum, 1e-10 * quad);
  }
}

TEST(Spectrum, HermitianAndRoundTrip) {
  std::mt19937_64 rng(5);
  const Grid g(32, 4.0);
  const Field f = random_smooth(g, rng);
  const Spectrum s = to_spectrum(f);
  for (std::ptrdiff_t k = 1; k < 16; ++k) EXPECT_EQ(s.coeff(-k), std::conj(s.coeff(k)));
  const Field back = to_field(s);
  EXPECT_LT(max_abs_diff(back, f), 1e-12 * f.max_abs());
}

TEST(Sobolev, ClosedForms) {
  const double L = 8.0;
  const Grid g(64, L);
  const Field c = Field::from_function(g, [](double) { return 1.5; });
  EXPECT_NEAR(sobolev_norm_sq(c, 0), 1.5 * 1.5 * L, 1e-12);
  const double w = 2 * kPi / L;
  const Field s = Field::from_function(g, [&](double x) { return std::sin(w * x); });
  EXPECT_NEAR(sobolev_norm_sq(s, 1), (L / 2) * (1 + w * w), 1e-12);
  const Field z(g);
  for (int order = 0; order <= 2; ++order) {
    EXPECT_EQ(sobolev_norm_sq(z, order), 0.0);
    EXPECT_EQ(sobolev_norm_sq(z, order, Window{-1.0, 1.0}), 0.0);
  }
}

TEST(Sobolev, WindowOutsideDomainIsConfigError) {
  const Grid g(32, 4.0);
  const Field z(g);
  EXPECT_THROW(sobolev_norm_sq(z, 1, Window{-3.0, 1.0}), ConfigError);
  EXPECT_THROW(sobolev_norm_sq(z, 1, Window{1.0, -1.0}), ConfigError);
}

TEST(Sobolev, WindowTrapezoidMatchesConstant) {
  const Grid g(64, 8.0);
  const Field c = Field::from_function(g, [](double) { return 2.0; });
  EXPECT_NEAR(sobolev_norm_sq(c, 0, Window{-2.0, 2.0}), 4.0 * 4.0, 1e-12);
}

TEST(Contamination, FlagsEdgeMass) {
  const Grid g(128, 40.0);
  const Field bump = Field::from_function(g, [](double x) { return std::exp(-x * x); });
  EXPECT_LT(boundary_contamination(bump), kContaminationThreshold);
  const Field wide = Field::from_function(g, [](double x) { return std::exp(-x * x / 100.0); });
  EXPECT_GT(boundary_contamination(wide), kContaminationThreshold);
  EXPECT_EQ(boundary_contamination(Field(g)), 0.0);
}

TEST(Snapshot, BitExactRoundTrip) {
  std::mt19937_64 rng(9);
  const Grid g(32, 6.5);
  const Field f = random_smooth(g, rng);
  std::stringstream ss;
  write_snapshot(ss, f, 0.125);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4 + 4 + 8 + 8 + 8 + 32 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "SKDV");
  const Snapshot back = read_snapshot(ss);
  EXPECT_EQ(back.t, 0.125);
  EXPECT_EQ(back.field.grid(), g);
  for (std::size_t j = 0; j < 32; ++j) EXPECT_EQ(std::bit_cast<std::uint64_t>(back.field[j]), std::bit_cast<std::uint64_t>(f[j]));
}

TEST(Snapshot, LittleEndianHeader) {
  const Grid g(8, 1.0);
  std::stringstream ss;
  write_snapshot(ss, Field(g), 0.0);
  const std::string b = ss.str();
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1u);  // version, low byte first
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 8u);  // n, low byte first
}

TEST(Snapshot, RejectsBadMagic) {
  std::stringstream ss("XXXX0000");
  EXPECT_THROW(read_snapshot(ss), ConfigError);
}

}  // namespace
}  // namespace skdv
