// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "skdv/field.hpp"

namespace skdv {

/// `zero` is a test hook (drift identically zero) used to isolate the noise.
enum class DriftVariant { zero, kdv2, regularized, galerkin_cutoff };

std::string to_string(DriftVariant v);
DriftVariant parse_drift_variant(const std::string& s);

struct DriftSpec {
  DriftVariant variant = DriftVariant::regularized;
  double epsilon = 0.1;
  std::size_t m = 32;

  /// kdv2 requires epsilon == 0; regularized and galerkin_cutoff require epsilon > 0.
  void validate() const;

  friend bool operator==(const DriftSpec&, const DriftSpec&) = default;
};

/// Cutoff factors multiplying each term of the Galerkin drift; all 1 otherwise.
struct CutoffFactors {
  double dissipation = 1.0;   // eps u_4x, argument |u_4x|^2 / m
  double advection = 1.0;     // u u_x, argument |u_x|^2 / m
  double dispersion = 1.0;    // u_3x and u u_3x, argument |u_3x|^2 / m
  double gradient = 1.0;      // 3 u_x u_2x, argument |u_x u_2x|^2 / m
};

/// Drift of du = drift(u) dt + Phi(u) dW, i.e. the negated bracket
///   -[eps u_4x + u_3x + u u_x + u u_3x + 3 u_x u_2x],
/// with products evaluated on a 3/2-padded grid and truncated back.
///
/// Holds scratch buffers, so one instance belongs to one thread of execution.
class DriftOperator {
 public:
  using Coeffs = std::vector<std::complex<double>>;

  DriftOperator(DriftSpec spec, Grid grid);

  const DriftSpec& spec() const noexcept { return spec_; }
  const Grid& grid() const noexcept { return grid_; }

  /// Full drift as a field.
  Field evaluate(const Field& u);

  /// Stiff/nonstiff split used by the IMEX stepper. On return `uhat` holds the
  /// spectrum of u, `nonlinear` the explicit part (projected for Galerkin) and
  /// `factors` the cutoff multipliers applied to the implicit linear symbols
  /// i k^3 (dispersion) and -eps k^4 (dissipation).
  void split(const Field& u, Coeffs& uhat, Coeffs& nonlinear, CutoffFactors& factors);

  /// Cutoff factors at u (all 1 unless the variant is galerkin_cutoff).
  CutoffFactors cutoffs(const Field& u);

 private:
  void load(const Field& u);
  void compute_nonlinear(Coeffs& out, CutoffFactors& factors);

  DriftSpec spec_;
  Grid grid_;
  std::size_t padded_n_;
  Coeffs uhat_;
  std::vector<Coeffs> deriv_hat_;        // orders 1..4
  std::vector<std::vector<double>> fine_;  // u, u_x, u_2x, u_3x on the padded grid
  Coeffs pad_buf_;
  std::vector<double> prod_;
  Coeffs prod_hat_;
  Coeffs nonlinear_;
};

/// Squared L2 norm of a field given its half spectrum (Parseval).
double spectral_l2_sq(const Grid& grid, const std::vector<std::complex<double>>& c);

Field drift_kdv2(const Field& u);
/// Requires epsilon > 0.
Field drift_regularized(const Field& u, double epsilon);
/// Requires u band-limited to |k| <= m and m <= n/2.
Field drift_galerkin(const Field& u, double epsilon, std::size_t m);

/// Zeroes Fourier coefficients with |k| > m. Returns the input unchanged when
/// those coefficients are already at round-off level, so it is idempotent.
Field project(const Field& u, std::size_t m);

/// True when coefficients with |k| > m are below rel_tol * max |c_k|.
bool is_band_limited(const Field& u, std::size_t m, double rel_tol);

}  // namespace skdv
