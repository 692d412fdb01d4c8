// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "skdv/errors.hpp"
#include "skdv/fft.hpp"

namespace skdv {

Grid::Grid(std::size_t n, double length) : n_(n), length_(length) {
  if (n < 8 || !std::has_single_bit(n)) {
    throw PreconditionError("Grid: n must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw PreconditionError("Grid: length must be positive and finite");
  }
}

double Grid::wavenumber(std::ptrdiff_t k) const noexcept {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / length_;
}

Field::Field(Grid grid) : grid_(grid), values_(grid.n(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n()) throw PreconditionError("Field: values.size() != grid.n");
}

Field Field::from_function(const Grid& grid, const std::function<double(double)>& f) {
  Field out(grid);
  for (std::size_t j = 0; j < grid.n(); ++j) out[j] = f(grid.x(j));
  return out;
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& other) {
  if (!(grid_ == other.grid_)) throw PreconditionError("Field: grid mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (!(grid_ == other.grid_)) throw PreconditionError("Field: grid mismatch");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw PreconditionError("hadamard: grid mismatch");
  Field out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

Spectrum::Spectrum(Grid grid) : grid_(grid), coeffs_(grid.spectrum_length()) {}

Spectrum::Spectrum(Grid grid, std::vector<std::complex<double>> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.spectrum_length()) {
    throw PreconditionError("Spectrum: coefficient count must be n/2 + 1");
  }
}

std::complex<double> Spectrum::coeff(std::ptrdiff_t k) const {
  const auto half = static_cast<std::ptrdiff_t>(grid_.n() / 2);
  if (k <= -half || k > half) throw PreconditionError("Spectrum::coeff: index out of range");
  return k >= 0 ? coeffs_[static_cast<std::size_t>(k)] : std::conj(coeffs_[static_cast<std::size_t>(-k)]);
}

Spectrum to_spectrum(const Field& f) {
  Spectrum s(f.grid());
  RealFft::for_length(f.grid().n()).forward(f.values(), s.coeffs());
  return s;
}

Field to_field(const Spectrum& s) {
  Field f(s.grid());
  RealFft::for_length(s.grid().n()).inverse(s.coeffs(), f.values());
  return f;
}

void require_finite(const Field& f, const char* where) {
  if (!f.all_finite()) throw BlowUpError(std::string("blow-up detected: non-finite values in ") + where);
}

Field derivative(const Field& f, int order) {
  if (order < 1 || order > 4) throw PreconditionError("derivative: order must be in 1..4");
  require_finite(f, "derivative");
  Spectrum s = to_spectrum(f);
  auto c = s.coeffs();
  const std::complex<double> ik_unit{0.0, 1.0};
  for (std::size_t k = 0; k < c.size(); ++k) {
    const std::complex<double> symbol = ik_unit * f.grid().wavenumber(static_cast<std::ptrdiff_t>(k));
    std::complex<double> mult = 1.0;
    for (int o = 0; o < order; ++o) mult *= symbol;
    c[k] *= mult;
  }
  c[c.size() - 1] = 0.0;
  return to_field(s);
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return f.grid().spacing() * sum;
}

double inner(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw PreconditionError("inner: grid mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return a.grid().spacing() * sum;
}

double integrate_window(const Field& f, const Window& w) {
  const Grid& g = f.grid();
  const double lo = -0.5 * g.length();
  const double hi = 0.5 * g.length();
  if (!(w.a <= w.b) || w.a < lo || w.b >= hi) {
    throw ConfigError("window [" + std::to_string(w.a) + ", " + std::to_string(w.b) +
                      "] is not contained in the domain [-L/2, L/2)");
  }
  // Composite trapezoid over the contiguous run of grid points inside [a, b].
  std::ptrdiff_t first = -1;
  std::ptrdiff_t last = -1;
  for (std::size_t j = 0; j < g.n(); ++j) {
    const double x = g.x(j);
    if (x >= w.a && x <= w.b) {
      if (first < 0) first = static_cast<std::ptrdiff_t>(j);
      last = static_cast<std::ptrdiff_t>(j);
    }
  }
  if (first < 0 || first == last) return 0.0;
  double sum = 0.5 * (f[static_cast<std::size_t>(first)] + f[static_cast<std::size_t>(last)]);
  for (std::ptrdiff_t j = first + 1; j < last; ++j) sum += f[static_cast<std::size_t>(j)];
  return g.spacing() * sum;
}

double sobolev_norm_sq(const Field& f, int s, std::optional<Window> window) {
  if (s < 0 || s > 2) throw PreconditionError("sobolev_norm_sq: s must be in 0..2");
  require_finite(f, "sobolev_norm_sq");
  auto sq_integral = [&](const Field& d) {
    const Field d2 = hadamard(d, d);
    return window ? integrate_window(d2, *window) : integrate(d2);
  };
  double total = sq_integral(f);
  for (int j = 1; j <= s; ++j) total += sq_integral(derivative(f, j));
  return total;
}

double boundary_contamination(const Field& f) {
  const double peak = f.max_abs();
  if (peak == 0.0) return 0.0;
  const double edge = std::max(std::abs(f[0]), std::abs(f[f.size() - 1]));
  return edge / peak;
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  os.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ConfigError("snapshot: truncated input");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& f, double t) {
  os.write("SKDV", 4);
  put_le<std::uint32_t>(os, kSnapshotVersion);
  put_le<std::uint64_t>(os, f.grid().n());
  put_le<double>(os, f.grid().length());
  put_le<double>(os, t);
  for (double v : f.values()) put_le<double>(os, v);
}

Snapshot read_snapshot(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "SKDV", 4) != 0) {
    throw ConfigError("snapshot: bad magic");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kSnapshotVersion) throw ConfigError("snapshot: unsupported version " + std::to_string(version));
  const auto n = get_le<std::uint64_t>(is);
  const double length = get_le<double>(is);
  const double t = get_le<double>(is);
  Grid grid(static_cast<std::size_t>(n), length);
  std::vector<double> values(grid.n());
  for (double& v : values) v = get_le<double>(is);
  return {Field(grid, std::move(values)), t};
}

void write_snapshot_file(const std::string& path, const Field& f, double t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_snapshot(os, f, t);
}

Snapshot read_snapshot_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace skdv
