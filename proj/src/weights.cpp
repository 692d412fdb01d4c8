// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skdv/errors.hpp"

namespace skdv {

WeightProfile WeightProfile::constant(double value) {
  if (!(value > 0.0)) throw PreconditionError("constant weight must be positive");
  return {Kind::constant, value, 0.0, value};
}

WeightProfile WeightProfile::atan(double scale, double offset) {
  if (!(scale > 0.0)) throw PreconditionError("atan weight scale must be positive");
  return {Kind::atan, scale, 0.0, offset};
}

WeightProfile WeightProfile::periodic_sine(double period, double amplitude, double offset) {
  if (!(period > 0.0)) throw PreconditionError("periodic weight period must be positive");
  return {Kind::periodic_sine, period, amplitude, offset};
}

std::string WeightProfile::name() const {
  switch (kind_) {
    case Kind::constant: return "const";
    case Kind::atan: return "atan";
    case Kind::periodic_sine: return "periodic_sine";
  }
  return "unknown";
}

double WeightProfile::eval(double x, int order) const {
  if (order < 0 || order > 4) throw PreconditionError("WeightProfile::eval: order must be in 0..4");
  switch (kind_) {
    case Kind::constant:
      return order == 0 ? offset_ : 0.0;
    case Kind::atan: {
      const double l = param_;
      const double s = x / l;
      const double q = 1.0 + s * s;
      switch (order) {
        case 0: return offset_ + std::atan(s);
        case 1: return 1.0 / (l * q);
        case 2: return -2.0 * s / (l * l * q * q);
        case 3: return (6.0 * s * s - 2.0) / (l * l * l * q * q * q);
        default: return 24.0 * s * (1.0 - s * s) / (l * l * l * l * q * q * q * q);
      }
    }
    case Kind::periodic_sine: {
      const double w = 2.0 * std::numbers::pi / param_;
      const double phase = w * x;
      const double sn = std::sin(phase);
      const double cs = std::cos(phase);
      const double wn = std::pow(w, order);
      switch (order) {
        case 0: return offset_ + amplitude_ * sn;
        case 1: return amplitude_ * wn * cs;
        case 2: return -amplitude_ * wn * sn;
        case 3: return -amplitude_ * wn * cs;
        default: return amplitude_ * wn * sn;
      }
    }
  }
  return 0.0;
}

Field WeightProfile::sample(const Grid& grid, int order) const {
  Field out(grid);
  for (std::size_t j = 0; j < grid.n(); ++j) out[j] = eval(grid.x(j), order);
  return out;
}

WeightFunction make_weight(const std::string& profile, double param, double lambda_cap, const Grid& grid) {
  if (!(lambda_cap > 2.0)) {
    throw InvariantError("weight: lambda must exceed 2 so that (lambda - 2) delta2 >= delta3 is satisfiable");
  }
  if (profile != "atan" && profile != "const") {
    throw ConfigError("weight.profile must be 'atan' or 'const', got '" + profile + "'");
  }
  if (!(param > 0.0) || !std::isfinite(param)) {
    throw InvariantError("weight: '" + profile + "' parameter must be positive (p increasing and p > 0)");
  }
  const WeightProfile p = profile == "atan" ? WeightProfile::atan(param) : WeightProfile::constant(param);

  const std::size_t fine_n = grid.n() * kCertifyRefinement;
  const double h = grid.length() / static_cast<double>(fine_n);
  double pmin = INFINITY;
  double pmax = -INFINITY;
  std::array<double, 4> dmax{0.0, 0.0, 0.0, 0.0};
  double prev = -INFINITY;
  for (std::size_t j = 0; j < fine_n; ++j) {
    const double x = -0.5 * grid.length() + static_cast<double>(j) * h;
    const double v = p.eval(x, 0);
    if (v < prev) throw InvariantError("weight: profile '" + profile + "' is not nondecreasing on the grid");
    prev = v;
    pmin = std::min(pmin, v);
    pmax = std::max(pmax, v);
    for (int n = 1; n <= 3; ++n) dmax[n] = std::max(dmax[n], std::abs(p.eval(x, n)));
  }
  if (!(pmin > 0.0)) throw InvariantError("weight: profile must be strictly positive on the grid");

  std::array<double, 4> delta{kDeltaLowerMargin * pmin, 0.0, 0.0, 0.0};
  for (int n = 1; n <= 3; ++n) delta[n] = kDeltaUpperMargin * dmax[n];
  if (!((lambda_cap - 2.0) * delta[2] >= delta[3])) {
    throw InvariantError("weight: (lambda - 2) delta2 >= delta3 fails (delta2 = " + std::to_string(delta[2]) +
                         ", delta3 = " + std::to_string(delta[3]) + ")");
  }
  return WeightFunction(p, delta, lambda_cap, pmax);
}

namespace {
double bump_tail(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double theta(double xi) {
  if (!(xi >= 0.0)) throw PreconditionError("theta: argument must be nonnegative");
  if (xi <= 1.0) return 1.0;
  if (xi >= 2.0) return 0.0;
  const double t = xi - 1.0;
  const double up = bump_tail(t);
  const double down = bump_tail(1.0 - t);
  return down / (up + down);
}

}  // namespace skdv
