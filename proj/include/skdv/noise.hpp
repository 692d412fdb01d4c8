// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skdv/field.hpp"
#include "skdv/rng.hpp"
#include "skdv/weights.hpp"

namespace skdv {

enum class NoiseKind { zero, additive, diagonal_multiplicative };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& s);

struct NoiseParams {
  NoiseKind kind = NoiseKind::additive;
  double sigma0 = 0.5;
  double decay_r = 2.5;
  std::size_t modes = 32;
  double clip = 5.0;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

/// Real orthonormal Fourier basis on the periodic box, ordered
/// e_0 = 1/sqrt(L), e_{2j-1} = sqrt(2/L) cos(2 pi j x / L), e_{2j} = sqrt(2/L) sin(2 pi j x / L).
Field basis_mode(const Grid& grid, std::size_t index);
/// Fourier wavenumber index j carried by basis mode `index`.
inline std::size_t basis_wavenumber(std::size_t index) { return (index + 1) / 2; }

/// Truncated cylindrical Wiener increment: modes() independent N(0, dt) draws.
struct WienerIncrement {
  double dt;
  std::vector<double> xi;
};

WienerIncrement sample_increment(RngStream& stream, double dt, std::size_t modes);

/// Phi(u) h = g(u) * sum_i q_i <h, e_i> e_i with q_i = sigma0 (1 + i)^(-decay_r) and
/// g = 0, 1 or clamp(u, -clip, clip) by kind.
class NoiseModel {
 public:
  NoiseModel(const NoiseParams& params, const Grid& grid);
  /// Test hook: explicit mode weights (must be strictly decreasing and positive).
  NoiseModel(NoiseKind kind, std::vector<double> weights, double clip, const Grid& grid);

  NoiseKind kind() const noexcept { return kind_; }
  std::size_t modes() const noexcept { return q_.size(); }
  double clip() const noexcept { return clip_; }
  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> weights() const noexcept { return q_; }
  const Field& mode(std::size_t i) const { return basis_.at(i); }
  /// sum_i q_i^2.
  double weight_sum_sq() const noexcept { return q_sum_sq_; }
  /// sum_i q_i^2 e_i(x)^2 on the grid.
  const Field& intensity() const noexcept { return intensity_; }
  /// Upper bound on sum_{i >= modes} q_i^2 / sum_{all i} q_i^2 for the power-law weights.
  double tail_fraction() const noexcept { return tail_fraction_; }

  /// Pointwise gain g(u).
  Field gain(const Field& u) const;
  /// sum_i q_i xi_i e_i.
  Field noise_field(std::span<const double> xi) const;

 private:
  void build_basis();

  NoiseKind kind_;
  std::vector<double> q_;
  double clip_;
  Grid grid_;
  std::vector<Field> basis_;
  Field intensity_;
  double q_sum_sq_ = 0.0;
  double tail_fraction_ = 0.0;
};

/// Phi(u) dW.
Field apply_phi(const NoiseModel& model, const Field& u, const WienerIncrement& dw);

/// Hilbert-Schmidt norm squared: sum_i q_i^2 |g(u) e_i|^2_{L2}.
double hs_norm_sq(const NoiseModel& model, const Field& u);

/// <Phi(u)^* a, Phi(u)^* b> = sum_i q_i^2 <g a, e_i> <g b, e_i>.
double adjoint_pairing(const NoiseModel& model, const Field& u, const Field& a, const Field& b);

/// Constants of the growth bound ||Phi(u)||_HS <= kappa1 max(|u|^2, |u|) + kappa2.
struct W1Certificate {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  /// Closed-form constants for the implemented family; the empirical pair never exceeds them.
  double kappa1_analytic = 0.0;
  double kappa2_analytic = 0.0;
  /// Runtime checks accept ||Phi(u)||_HS <= margin * bound.
  double margin = 1.1;

  double bound(const Field& u) const;
  /// ||Phi(u)||_HS / bound(u) (0 when both vanish).
  double utilization(const NoiseModel& model, const Field& u) const;
};

/// Standard trial set: zero, constants at +-lambda and +-clip, grid spikes of
/// height min(clip, lambda), and a few smooth bumps.
std::vector<Field> default_w1_trials(const NoiseModel& model, double lambda);

/// Fits the tightest (kappa1, kappa2) of the form kappa2 = ||Phi(0)||_HS,
/// kappa1 = max over trials of (||Phi(u)|| - kappa2) / max(|u|^2, |u|).
/// Throws NumericalError if the empirical constants exceed the closed form.
W1Certificate certify_w1(const NoiseModel& model, std::span<const Field> trials);

/// Throws NumericalError when ||Phi(u)||_HS exceeds margin * bound(u).
void assert_w1(const NoiseModel& model, const W1Certificate& cert, const Field& u);

}  // namespace skdv
