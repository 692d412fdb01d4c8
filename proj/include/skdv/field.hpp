// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skdv {

/// Uniform periodic grid on [-L/2, L/2).
///
/// n must be a power of two no smaller than 8. The spacing is always derived
/// from n and L and never stored.
class Grid {
 public:
  Grid(std::size_t n, double length);

  std::size_t n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / static_cast<double>(n_); }
  double x(std::size_t j) const noexcept { return -0.5 * length_ + static_cast<double>(j) * spacing(); }
  /// Angular wavenumber 2 pi k / L of Fourier index k.
  double wavenumber(std::ptrdiff_t k) const noexcept;
  std::size_t spectrum_length() const noexcept { return n_ / 2 + 1; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
  double length_;
};

/// Closed interval [a, b] used to restrict integrals.
struct Window {
  double a;
  double b;
};

/// Real samples of a function on a Grid.
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<double> values);

  static Field from_function(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  double& operator[](std::size_t j) noexcept { return values_[j]; }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, double s);
Field operator*(double s, Field a);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);

/// Fourier coefficients of a real field in half-spectrum layout (indices 0..n/2).
class Spectrum {
 public:
  Spectrum(Grid grid, std::vector<std::complex<double>> coeffs);
  explicit Spectrum(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const std::complex<double>> coeffs() const noexcept { return coeffs_; }
  std::span<std::complex<double>> coeffs() noexcept { return coeffs_; }
  /// Coefficient of signed index k in (-n/2, n/2]; negative k via conjugate symmetry.
  std::complex<double> coeff(std::ptrdiff_t k) const;

 private:
  Grid grid_;
  std::vector<std::complex<double>> coeffs_;
};

Spectrum to_spectrum(const Field& f);
Field to_field(const Spectrum& s);

/// Throws BlowUpError if any sample is NaN or infinite.
void require_finite(const Field& f, const char* where);

/// Spectral derivative of order 1..4. The Nyquist mode is discarded.
Field derivative(const Field& f, int order);

/// Periodic trapezoidal rule: spacing * sum of samples.
double integrate(const Field& f);

/// L2 inner product by periodic quadrature.
double inner(const Field& a, const Field& b);

/// Trapezoidal quadrature restricted to the grid points inside the window.
double integrate_window(const Field& f, const Window& w);

/// Sum over j = 0..s of the integral of (d^j f)^2, over the window if given.
/// Derivatives are taken on the whole periodic domain before restriction.
double sobolev_norm_sq(const Field& f, int s, std::optional<Window> window = std::nullopt);

/// Ratio of the edge amplitude to max |u|; 0 for the zero field.
double boundary_contamination(const Field& f);

inline constexpr double kContaminationThreshold = 1e-8;

/// Binary snapshot: "SKDV", u32 version, u64 n, f64 L, f64 t, n f64 (little-endian).
struct Snapshot {
  Field field;
  double t;
};
inline constexpr std::uint32_t kSnapshotVersion = 1;
void write_snapshot(std::ostream& os, const Field& f, double t);
Snapshot read_snapshot(std::istream& is);
void write_snapshot_file(const std::string& path, const Field& f, double t);
Snapshot read_snapshot_file(const std::string& path);

}  // namespace skdv
