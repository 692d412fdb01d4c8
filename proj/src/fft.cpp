// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace skdv {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft& RealFft::for_length(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::unique_ptr<RealFft>(new RealFft(n))).first;
  }
  return *it->second;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("RealFft: length must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_buf_ = fftw_alloc_real(n);
  auto* cbuf = fftw_alloc_complex(n / 2 + 1);
  complex_buf_ = cbuf;
  const int ni = static_cast<int>(n);
  plan_fwd_ = fftw_plan_dft_r2c_1d(ni, real_buf_, cbuf, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(ni, cbuf, real_buf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_buf_);
  fftw_free(complex_buf_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t m = spectrum_length();
  for (std::size_t j = 0; j < n_; ++j) real_buf_[j] = in[j];
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  auto* c = static_cast<fftw_complex*>(complex_buf_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t k = 0; k < m; ++k) out[k] = {c[k][0] * scale, c[k][1] * scale};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t m = spectrum_length();
  auto* c = static_cast<fftw_complex*>(complex_buf_);
  for (std::size_t k = 0; k < m; ++k) {
    c[k][0] = in[k].real();
    c[k][1] = in[k].imag();
  }
  // c2r ignores the imaginary parts of the DC and Nyquist bins.
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  for (std::size_t j = 0; j < n_; ++j) out[j] = real_buf_[j];
}

}  // namespace skdv
