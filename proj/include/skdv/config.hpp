// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "skdv/dynamics.hpp"
#include "skdv/field.hpp"
#include "skdv/integrator.hpp"
#include "skdv/noise.hpp"
#include "skdv/weights.hpp"

namespace skdv {

enum class InitialKind { gaussian_bump, single_mode, sech_squared };

struct InitialCondition {
  InitialKind kind = InitialKind::gaussian_bump;
  double amplitude = 0.5;
  double width = 2.0;
  double center = 0.0;
  /// Fourier index for single_mode.
  std::size_t mode = 1;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

/// Complete description of one experiment.
///
/// Text form: one `key = value` per line, `#` starts a comment. Keys:
///   grid.n grid.length drift.variant epsilon galerkin_m
///   noise.kind noise.sigma0 noise.decay_r noise.modes noise.clip
///   weight.profile weight.param lambda
///   dt t_end scheme snapshot_every
///   initial_condition.kind initial_condition.amplitude initial_condition.width
///   initial_condition.center initial_condition.mode
///   seed window_k output_dir paths workers
struct SimConfig {
  std::size_t grid_n = 128;
  double grid_length = 40.0;
  DriftSpec drift{DriftVariant::regularized, 0.1, 32};
  NoiseParams noise{};
  std::string weight_profile = "atan";
  double weight_param = 5.0;
  double lambda = 10.0;
  StepperConfig stepper{};
  InitialCondition initial{};
  std::uint64_t seed = 12345;
  double window_k = 5.0;
  std::string output_dir = "out";
  std::size_t paths = 100;
  std::size_t workers = 1;

  /// Checks every sub-config; throws ConfigError naming the violated invariant.
  void validate() const;

  Grid grid() const { return Grid(grid_n, grid_length); }
  NoiseModel noise_model() const { return NoiseModel(noise, grid()); }
  WeightFunction weight() const { return make_weight(weight_profile, weight_param, lambda, grid()); }
  /// Initial field, projected onto P_m for the Galerkin variant.
  Field initial_field() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

std::string to_string(InitialKind k);
InitialKind parse_initial_kind(const std::string& s);

/// Applies one `key=value` assignment. Unknown keys and malformed values throw ConfigError.
void apply_setting(SimConfig& cfg, const std::string& key, const std::string& value);
/// Parses `key=value` (as given to --override).
void apply_override(SimConfig& cfg, const std::string& assignment);

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);
/// Fully resolved text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& cfg);
/// Ordered key/value pairs (used for JSON echo).
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& cfg);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace skdv
