// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skdv/errors.hpp"

namespace skdv {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::additive: return "additive";
    case NoiseKind::diagonal_multiplicative: return "diagonal_multiplicative";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "zero") return NoiseKind::zero;
  if (s == "additive") return NoiseKind::additive;
  if (s == "diagonal_multiplicative") return NoiseKind::diagonal_multiplicative;
  throw ConfigError("noise.kind must be zero, additive or diagonal_multiplicative, got '" + s + "'");
}

Field basis_mode(const Grid& grid, std::size_t index) {
  const double len = grid.length();
  if (index == 0) return Field::from_function(grid, [len](double) { return 1.0 / std::sqrt(len); });
  const double j = static_cast<double>(basis_wavenumber(index));
  const double amp = std::sqrt(2.0 / len);
  const double w = 2.0 * std::numbers::pi * j / len;
  if (index % 2 == 1) return Field::from_function(grid, [=](double x) { return amp * std::cos(w * x); });
  return Field::from_function(grid, [=](double x) { return amp * std::sin(w * x); });
}

WienerIncrement sample_increment(RngStream& stream, double dt, std::size_t modes) {
  if (!(dt > 0.0)) throw PreconditionError("sample_increment: dt must be positive");
  WienerIncrement dw{dt, std::vector<double>(modes)};
  const double scale = std::sqrt(dt);
  for (std::size_t i = 0; i < modes; ++i) dw.xi[i] = scale * stream.normal(static_cast<std::uint32_t>(i));
  stream.advance();
  return dw;
}

NoiseModel::NoiseModel(const NoiseParams& params, const Grid& grid)
    : kind_(params.kind), clip_(params.clip), grid_(grid), intensity_(grid) {
  if (!(params.sigma0 >= 0.0)) throw ConfigError("noise.sigma0 must be nonnegative");
  if (!(params.decay_r > 0.5)) throw ConfigError("noise.decay_r must exceed 1/2 (square-summable weights)");
  if (params.modes < 1) throw ConfigError("noise.modes must be positive");
  q_.resize(params.modes);
  for (std::size_t i = 0; i < params.modes; ++i) {
    q_[i] = params.sigma0 * std::pow(1.0 + static_cast<double>(i), -params.decay_r);
  }
  const double m = static_cast<double>(params.modes);
  const double two_r = 2.0 * params.decay_r;
  double retained = 0.0;
  for (std::size_t i = 0; i < params.modes; ++i) retained += std::pow(1.0 + static_cast<double>(i), -two_r);
  // sum_{i >= m} (1 + i)^(-2r) <= integral_m^inf x^(-2r) dx.
  tail_fraction_ = std::pow(m, 1.0 - two_r) / (two_r - 1.0) / retained;
  build_basis();
}

NoiseModel::NoiseModel(NoiseKind kind, std::vector<double> weights, double clip, const Grid& grid)
    : kind_(kind), q_(std::move(weights)), clip_(clip), grid_(grid), intensity_(grid) {
  if (q_.empty()) throw ConfigError("noise: at least one mode weight required");
  build_basis();
}

void NoiseModel::build_basis() {
  if (!(clip_ > 0.0)) throw ConfigError("noise.clip must be positive");
  if (basis_wavenumber(q_.size() - 1) >= grid_.n() / 2) {
    throw ConfigError("noise.modes too large for the grid: highest wavenumber must stay below n/2");
  }
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (!(q_[i] >= 0.0) || !std::isfinite(q_[i])) throw ConfigError("noise: mode weights must be finite and >= 0");
    if (i > 0 && q_[0] > 0.0 && !(q_[i] < q_[i - 1])) {
      throw InvariantError("noise: mode weights must be strictly decreasing");
    }
  }
  basis_.clear();
  basis_.reserve(q_.size());
  q_sum_sq_ = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    basis_.push_back(basis_mode(grid_, i));
    q_sum_sq_ += q_[i] * q_[i];
    const double q2 = q_[i] * q_[i];
    const Field& e = basis_.back();
    for (std::size_t j = 0; j < grid_.n(); ++j) intensity_[j] += q2 * e[j] * e[j];
  }
}

Field NoiseModel::gain(const Field& u) const {
  Field g(u.grid());
  switch (kind_) {
    case NoiseKind::zero:
      break;
    case NoiseKind::additive:
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = 1.0;
      break;
    case NoiseKind::diagonal_multiplicative:
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::clamp(u[j], -clip_, clip_);
      break;
  }
  return g;
}

Field NoiseModel::noise_field(std::span<const double> xi) const {
  if (xi.size() != q_.size()) throw PreconditionError("noise_field: increment has wrong number of modes");
  Field out(grid_);
  auto v = out.values();
  for (std::size_t i = 0; i < q_.size(); ++i) {
    const double c = q_[i] * xi[i];
    if (c == 0.0) continue;
    const auto e = basis_[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += c * e[j];
  }
  return out;
}

Field apply_phi(const NoiseModel& model, const Field& u, const WienerIncrement& dw) {
  require_finite(u, "apply_phi");
  if (!(u.grid() == model.grid())) throw PreconditionError("apply_phi: grid mismatch");
  if (model.kind() == NoiseKind::zero) return Field(u.grid());
  Field out = model.noise_field(dw.xi);
  if (model.kind() == NoiseKind::diagonal_multiplicative) out = hadamard(model.gain(u), out);
  return out;
}

double hs_norm_sq(const NoiseModel& model, const Field& u) {
  require_finite(u, "hs_norm_sq");
  switch (model.kind()) {
    case NoiseKind::zero: return 0.0;
    case NoiseKind::additive: return integrate(model.intensity());
    case NoiseKind::diagonal_multiplicative: {
      const Field g = model.gain(u);
      return integrate(hadamard(hadamard(g, g), model.intensity()));
    }
  }
  return 0.0;
}

double adjoint_pairing(const NoiseModel& model, const Field& u, const Field& a, const Field& b) {
  if (model.kind() == NoiseKind::zero) return 0.0;
  const Field g = model.gain(u);
  const Field ga = hadamard(g, a);
  const Field gb = hadamard(g, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < model.modes(); ++i) {
    const double q = model.weights()[i];
    sum += q * q * inner(ga, model.mode(i)) * inner(gb, model.mode(i));
  }
  return sum;
}

double W1Certificate::bound(const Field& u) const {
  const double norm = std::sqrt(inner(u, u));
  return kappa1 * std::max(norm * norm, norm) + kappa2;
}

double W1Certificate::utilization(const NoiseModel& model, const Field& u) const {
  const double hs = std::sqrt(hs_norm_sq(model, u));
  const double b = bound(u);
  if (b == 0.0) return hs == 0.0 ? 0.0 : INFINITY;
  return hs / b;
}

std::vector<Field> default_w1_trials(const NoiseModel& model, double lambda) {
  const Grid& g = model.grid();
  std::vector<Field> trials;
  trials.emplace_back(g);
  for (double level : {lambda, -lambda, model.clip(), -model.clip(), 1.0, 0.1}) {
    trials.push_back(Field::from_function(g, [level](double) { return level; }));
  }
  // Unit-L2 spikes saturate sup_x sum_i q_i^2 e_i(x)^2, which is the closed-form kappa1.
  const double spike = std::min({model.clip(), lambda, 1.0 / std::sqrt(g.spacing())});
  for (std::size_t j = 0; j < g.n(); ++j) {
    Field f(g);
    f[j] = spike;
    trials.push_back(std::move(f));
  }
  for (double amp : {lambda, 1.0, 0.1}) {
    for (double width : {0.5, 2.0}) {
      trials.push_back(Field::from_function(g, [=](double x) { return amp * std::exp(-x * x / (2 * width * width)); }));
    }
  }
  return trials;
}

W1Certificate certify_w1(const NoiseModel& model, std::span<const Field> trials) {
  if (trials.empty()) throw PreconditionError("certify_w1: trial set must be non-empty");
  W1Certificate cert;
  switch (model.kind()) {
    case NoiseKind::zero:
      break;
    case NoiseKind::additive:
      cert.kappa2_analytic = std::sqrt(model.weight_sum_sq());
      break;
    case NoiseKind::diagonal_multiplicative:
      cert.kappa1_analytic = std::sqrt(model.intensity().max_abs());
      break;
  }

  const Field zero(model.grid());
  cert.kappa2 = std::sqrt(hs_norm_sq(model, zero));
  for (const Field& u : trials) {
    const double norm = std::sqrt(inner(u, u));
    const double denom = std::max(norm * norm, norm);
    const double hs = std::sqrt(hs_norm_sq(model, u));
    if (denom == 0.0) {
      if (hs > cert.kappa2) throw NumericalError("certify_w1: zero-norm trial exceeds kappa2");
      continue;
    }
    cert.kappa1 = std::max(cert.kappa1, (hs - cert.kappa2) / denom);
  }

  constexpr double kRoundoff = 1e-12;
  if (cert.kappa1 > cert.kappa1_analytic * (1 + kRoundoff) + kRoundoff ||
      cert.kappa2 > cert.kappa2_analytic * (1 + kRoundoff) + kRoundoff) {
    throw NumericalError("certify_w1: empirical constants exceed the closed-form bound");
  }
  return cert;
}

void assert_w1(const NoiseModel& model, const W1Certificate& cert, const Field& u) {
  const double hs = std::sqrt(hs_norm_sq(model, u));
  const double limit = cert.margin * cert.bound(u);
  if (hs > limit) {
    throw NumericalError("W1 assertion failed: ||Phi(u)||_HS = " + std::to_string(hs) +
                         " exceeds certified bound " + std::to_string(limit));
  }
}

}  // namespace skdv
