// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>

#include "skdv/field.hpp"

namespace skdv {

/// Smooth weight profile p(x) with closed-form derivatives up to order 4.
class WeightProfile {
 public:
  enum class Kind { constant, atan, periodic_sine };

  /// p(x) = value.
  static WeightProfile constant(double value);
  /// p(x) = offset + atan(x / scale). Increasing and bounded.
  static WeightProfile atan(double scale, double offset = 2.0);
  /// p(x) = offset + amplitude * sin(2 pi x / period). Not monotone; used
  /// where periodic boundary terms must vanish exactly.
  static WeightProfile periodic_sine(double period, double amplitude = 1.0, double offset = 2.0);

  Kind kind() const noexcept { return kind_; }
  double param() const noexcept { return param_; }
  bool periodic() const noexcept { return kind_ != Kind::atan; }

  /// d^order p / dx^order at x, order in 0..4.
  double eval(double x, int order = 0) const;
  Field sample(const Grid& grid, int order = 0) const;

  std::string name() const;

 private:
  WeightProfile(Kind kind, double param, double amplitude, double offset)
      : kind_(kind), param_(param), amplitude_(amplitude), offset_(offset) {}

  Kind kind_;
  double param_;
  double amplitude_;
  double offset_;
};

/// A weight profile together with certified bounds:
///   p nondecreasing, p > delta0 > 0, |p^(n)| <= delta_n (n = 1..3),
///   (lambda - 2) delta2 >= delta3.
class WeightFunction {
 public:
  const WeightProfile& profile() const noexcept { return profile_; }
  double delta(int n) const { return deltas_.at(static_cast<std::size_t>(n)); }
  const std::array<double, 4>& deltas() const noexcept { return deltas_; }
  double lambda_cap() const noexcept { return lambda_; }
  /// Largest sampled value of p (used by trace bounds).
  double sup() const noexcept { return sup_; }

 private:
  friend WeightFunction make_weight(const std::string&, double, double, const Grid&);
  WeightFunction(WeightProfile p, std::array<double, 4> d, double lambda, double sup)
      : profile_(p), deltas_(d), lambda_(lambda), sup_(sup) {}

  WeightProfile profile_;
  std::array<double, 4> deltas_;
  double lambda_;
  double sup_;
};

/// Safety factors applied to sampled extrema.
inline constexpr double kDeltaLowerMargin = 0.9;
inline constexpr double kDeltaUpperMargin = 1.1;
/// Certification samples at this multiple of the grid resolution.
inline constexpr std::size_t kCertifyRefinement = 8;

/// Builds a certified weight. profile is "atan" (param = scale) or "const"
/// (param = value). Throws InvariantError when lambda_cap <= 2, when the
/// profile is not monotone or not positive on the grid, or when
/// (lambda - 2) delta2 >= delta3 fails.
WeightFunction make_weight(const std::string& profile, double param, double lambda_cap, const Grid& grid);

/// Smooth cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity and nonincreasing in between.
double theta(double xi);

}  // namespace skdv
