// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skdv/config.hpp"
#include "skdv/field.hpp"

namespace skdv {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool pass() const;
  /// First failing check, if any.
  const CheckResult* first_failure() const;
  /// One JSON object with every check, tolerance and measurement.
  std::string to_json() const;
};

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names = {"identities", "noise_w1", "martingale", "ito_budget", "moments", "all"};
  return names;
}

/// Throws ConfigError for an unknown suite name.
VerifyReport run_verify(const std::string& suite, const SimConfig& cfg);

/// Smooth, compactly concentrated test field: one to three Gaussian bumps of
/// width 2h..4h centered within L/8 of the origin, amplitudes in [0.5, 2].
/// h is `width_unit` when given (to resample one field on finer grids), else the grid spacing.
/// Deterministic in (seed, index).
Field random_smooth_field(const Grid& grid, std::uint64_t seed, std::uint64_t index,
                          std::optional<double> width_unit = std::nullopt);

}  // namespace skdv
