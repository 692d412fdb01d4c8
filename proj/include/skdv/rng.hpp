// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace skdv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Standard normal variate addressed by (seed, path, step, index).
///
/// The Philox counter is (path_lo, path_hi, step, index / 2) under key = seed;
/// the two 64-bit halves of the output feed one Box-Muller pair, and
/// index % 2 selects the cosine or sine branch. Every draw is a pure function
/// of its coordinates, so paths can run in any order on any thread.
double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint32_t step, std::uint32_t index);

/// Cursor over the draws of one path: value semantics, owned by that path.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t path, std::uint32_t step = 0)
      : seed_(seed), path_(path), step_(step) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t path() const noexcept { return path_; }
  std::uint32_t step() const noexcept { return step_; }

  double normal(std::uint32_t index) const { return standard_normal(seed_, path_, step_, index); }
  void advance() noexcept { ++step_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
  std::uint32_t step_;
};

}  // namespace skdv
