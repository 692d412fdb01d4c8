// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace skdv {

/// Real-to-complex FFT of a fixed length backed by FFTW.
///
/// Plans are cached per thread and per length; planning itself is serialized
/// because the FFTW planner is not reentrant. Execution copies through
/// plan-owned aligned buffers so every call uses the same codelets regardless
/// of the caller's memory alignment, which keeps results bitwise reproducible
/// across threads.
///
/// Normalization: forward computes c_k = (1/n) sum_j u_j exp(-2 pi i k j / n)
/// for k = 0..n/2; inverse evaluates u_j = sum_k c_k exp(2 pi i k j / n) with
/// Hermitian completion.
class RealFft {
 public:
  static RealFft& for_length(std::size_t n);

  std::size_t length() const noexcept { return n_; }
  std::size_t spectrum_length() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft();

 private:
  explicit RealFft(std::size_t n);

  std::size_t n_;
  double* real_buf_ = nullptr;
  void* complex_buf_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

}  // namespace skdv
