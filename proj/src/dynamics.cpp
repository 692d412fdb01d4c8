// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "skdv/errors.hpp"
#include "skdv/fft.hpp"
#include "skdv/weights.hpp"

namespace skdv {

std::string to_string(DriftVariant v) {
  switch (v) {
    case DriftVariant::zero: return "zero";
    case DriftVariant::kdv2: return "kdv2";
    case DriftVariant::regularized: return "regularized";
    case DriftVariant::galerkin_cutoff: return "galerkin_cutoff";
  }
  return "unknown";
}

DriftVariant parse_drift_variant(const std::string& s) {
  if (s == "zero") return DriftVariant::zero;
  if (s == "kdv2") return DriftVariant::kdv2;
  if (s == "regularized") return DriftVariant::regularized;
  if (s == "galerkin_cutoff") return DriftVariant::galerkin_cutoff;
  throw ConfigError("drift.variant must be zero, kdv2, regularized or galerkin_cutoff, got '" + s + "'");
}

void DriftSpec::validate() const {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw ConfigError("DriftSpec invariant violated: epsilon must be >= 0 (got " + std::to_string(epsilon) + ")");
  }
  if (variant == DriftVariant::kdv2 && epsilon != 0.0) {
    throw ConfigError("DriftSpec invariant violated: variant kdv2 requires epsilon = 0");
  }
  if ((variant == DriftVariant::regularized || variant == DriftVariant::galerkin_cutoff) && !(epsilon > 0.0)) {
    throw ConfigError("DriftSpec invariant violated: variant " + to_string(variant) + " requires epsilon > 0");
  }
  if (variant == DriftVariant::galerkin_cutoff && m < 1) {
    throw ConfigError("DriftSpec invariant violated: galerkin_m must be positive");
  }
}

double spectral_l2_sq(const Grid& grid, const std::vector<std::complex<double>>& c) {
  const std::size_t half = grid.n() / 2;
  double sum = std::norm(c[0]) + std::norm(c[half]);
  for (std::size_t k = 1; k < half; ++k) sum += 2.0 * std::norm(c[k]);
  return grid.length() * sum;
}

DriftOperator::DriftOperator(DriftSpec spec, Grid grid)
    : spec_(spec),
      grid_(grid),
      padded_n_(3 * grid.n() / 2),
      uhat_(grid.spectrum_length()),
      deriv_hat_(5, Coeffs(grid.spectrum_length())),
      fine_(4, std::vector<double>(3 * grid.n() / 2)),
      pad_buf_(3 * grid.n() / 4 + 1),
      prod_(3 * grid.n() / 2),
      prod_hat_(3 * grid.n() / 4 + 1),
      nonlinear_(grid.spectrum_length()) {
  spec_.validate();
  if (spec_.variant == DriftVariant::galerkin_cutoff && spec_.m > grid.n() / 2) {
    throw ConfigError("galerkin_m must not exceed n/2");
  }
}

void DriftOperator::load(const Field& u) {
  require_finite(u, "drift");
  if (!(u.grid() == grid_)) throw PreconditionError("drift: grid mismatch");
  RealFft::for_length(grid_.n()).forward(u.values(), uhat_);
  const std::size_t half = grid_.n() / 2;
  uhat_[half] = 0.0;
  if (spec_.variant == DriftVariant::galerkin_cutoff) {
    double peak = 0.0;
    double tail = 0.0;
    for (std::size_t k = 0; k <= half; ++k) {
      peak = std::max(peak, std::abs(uhat_[k]));
      if (k > spec_.m) tail = std::max(tail, std::abs(uhat_[k]));
    }
    if (tail > 1e-10 * peak + 1e-300) {
      throw PreconditionError("drift_galerkin: u is not in the range of P_m");
    }
  }
  for (std::size_t k = 0; k <= half; ++k) {
    const std::complex<double> ik{0.0, grid_.wavenumber(static_cast<std::ptrdiff_t>(k))};
    std::complex<double> mult = 1.0;
    for (int o = 1; o <= 4; ++o) {
      mult *= ik;
      deriv_hat_[o][k] = mult * uhat_[k];
    }
  }
}

void DriftOperator::compute_nonlinear(Coeffs& out, CutoffFactors& factors) {
  const std::size_t half = grid_.n() / 2;
  auto& fine_fft = RealFft::for_length(padded_n_);
  for (int o = 0; o < 4; ++o) {
    const Coeffs& src = o == 0 ? uhat_ : deriv_hat_[o];
    std::fill(pad_buf_.begin(), pad_buf_.end(), std::complex<double>{});
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(half), pad_buf_.begin());
    fine_fft.inverse(pad_buf_, fine_[o]);
  }
  const auto& u = fine_[0];
  const auto& ux = fine_[1];
  const auto& uxx = fine_[2];
  const auto& uxxx = fine_[3];

  factors = {};
  std::fill(out.begin(), out.end(), std::complex<double>{});
  if (spec_.variant == DriftVariant::galerkin_cutoff) {
    const double m = static_cast<double>(spec_.m);
    factors.dissipation = theta(spectral_l2_sq(grid_, deriv_hat_[4]) / m);
    factors.advection = theta(spectral_l2_sq(grid_, deriv_hat_[1]) / m);
    factors.dispersion = theta(spectral_l2_sq(grid_, deriv_hat_[3]) / m);
    for (std::size_t j = 0; j < padded_n_; ++j) prod_[j] = ux[j] * uxx[j];
    fine_fft.forward(prod_, prod_hat_);
    std::copy(prod_hat_.begin(), prod_hat_.begin() + static_cast<std::ptrdiff_t>(half), nonlinear_.begin());
    nonlinear_[half] = 0.0;
    factors.gradient = theta(spectral_l2_sq(grid_, nonlinear_) / m);

    const double a = factors.advection;
    const double d = factors.dispersion;
    for (std::size_t j = 0; j < padded_n_; ++j) prod_[j] = a * u[j] * ux[j] + d * u[j] * uxxx[j];
    fine_fft.forward(prod_, prod_hat_);
    const double g3 = 3.0 * factors.gradient;
    const std::size_t top = std::min(spec_.m, half - 1);
    for (std::size_t k = 0; k <= top; ++k) out[k] = -(prod_hat_[k] + g3 * nonlinear_[k]);
  } else {
    for (std::size_t j = 0; j < padded_n_; ++j) prod_[j] = u[j] * ux[j] + u[j] * uxxx[j] + 3.0 * ux[j] * uxx[j];
    fine_fft.forward(prod_, prod_hat_);
    for (std::size_t k = 0; k < half; ++k) out[k] = -prod_hat_[k];
  }
}

CutoffFactors DriftOperator::cutoffs(const Field& u) {
  Coeffs scratch(grid_.spectrum_length());
  CutoffFactors f;
  load(u);
  if (spec_.variant == DriftVariant::galerkin_cutoff) compute_nonlinear(scratch, f);
  return f;
}

void DriftOperator::split(const Field& u, Coeffs& uhat, Coeffs& nonlinear, CutoffFactors& factors) {
  nonlinear.resize(grid_.spectrum_length());
  if (spec_.variant == DriftVariant::zero) {
    require_finite(u, "drift");
    uhat.resize(grid_.spectrum_length());
    RealFft::for_length(grid_.n()).forward(u.values(), uhat);
    std::fill(nonlinear.begin(), nonlinear.end(), std::complex<double>{});
    factors = {0.0, 0.0, 0.0, 0.0};
    return;
  }
  load(u);
  compute_nonlinear(nonlinear, factors);
  uhat = uhat_;
}

Field DriftOperator::evaluate(const Field& u) {
  if (spec_.variant == DriftVariant::zero) {
    require_finite(u, "drift");
    return Field(grid_);
  }
  CutoffFactors f;
  load(u);
  compute_nonlinear(nonlinear_, f);
  const std::size_t half = grid_.n() / 2;
  const double eps = spec_.epsilon;
  Coeffs total(grid_.spectrum_length());
  const std::size_t top = spec_.variant == DriftVariant::galerkin_cutoff ? std::min(spec_.m, half - 1) : half - 1;
  for (std::size_t k = 0; k <= top; ++k) {
    const double kk = grid_.wavenumber(static_cast<std::ptrdiff_t>(k));
    const std::complex<double> linear{-eps * f.dissipation * kk * kk * kk * kk, f.dispersion * kk * kk * kk};
    total[k] = nonlinear_[k] + linear * uhat_[k];
  }
  Field out(grid_);
  RealFft::for_length(grid_.n()).inverse(total, out.values());
  require_finite(out, "drift");
  return out;
}

Field drift_kdv2(const Field& u) {
  DriftOperator op({DriftVariant::kdv2, 0.0, 1}, u.grid());
  return op.evaluate(u);
}

Field drift_regularized(const Field& u, double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("drift_regularized: epsilon must be positive");
  DriftOperator op({DriftVariant::regularized, epsilon, 1}, u.grid());
  return op.evaluate(u);
}

Field drift_galerkin(const Field& u, double epsilon, std::size_t m) {
  if (m > u.grid().n() / 2) throw PreconditionError("drift_galerkin: m must not exceed n/2");
  if (!(epsilon > 0.0)) throw PreconditionError("drift_galerkin: epsilon must be positive");
  DriftOperator op({DriftVariant::galerkin_cutoff, epsilon, m}, u.grid());
  return op.evaluate(u);
}

bool is_band_limited(const Field& u, std::size_t m, double rel_tol) {
  const Spectrum s = to_spectrum(u);
  double peak = 0.0;
  double tail = 0.0;
  for (std::size_t k = 0; k < s.coeffs().size(); ++k) {
    const double a = std::abs(s.coeffs()[k]);
    peak = std::max(peak, a);
    if (k > m) tail = std::max(tail, a);
  }
  return tail <= rel_tol * peak;
}

Field project(const Field& u, std::size_t m) {
  if (m > u.grid().n() / 2) throw PreconditionError("project: m must not exceed n/2");
  Spectrum s = to_spectrum(u);
  auto c = s.coeffs();
  double peak = 0.0;
  double tail = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    peak = std::max(peak, std::abs(c[k]));
    if (k > m) tail = std::max(tail, std::abs(c[k]));
  }
  constexpr double kRoundoff = 64 * 2.220446049250313e-16;
  if (tail <= kRoundoff * peak) return u;
  for (std::size_t k = m + 1; k < c.size(); ++k) c[k] = 0.0;
  return to_field(s);
}

}  // namespace skdv
