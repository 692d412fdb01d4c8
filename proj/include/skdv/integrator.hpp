// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skdv/diagnostics.hpp"
#include "skdv/dynamics.hpp"
#include "skdv/field.hpp"
#include "skdv/noise.hpp"
#include "skdv/rng.hpp"

namespace skdv {

enum class Scheme { imex_em, explicit_em, deterministic_rk4 };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct StepperConfig {
  double dt = 1e-3;
  double t_end = 0.5;
  Scheme scheme = Scheme::imex_em;
  std::size_t snapshot_every = 10;

  /// dt > 0, t_end >= 0 and a whole number of steps, dt <= t_end when t_end > 0,
  /// at most 1e8 steps, snapshot_every >= 1.
  void validate() const;
  std::uint64_t step_count() const;

  friend bool operator==(const StepperConfig&, const StepperConfig&) = default;
};

struct PathState {
  double t = 0.0;
  Field u;
  RngStream rng;
  std::uint64_t step = 0;
};

/// Advances one path. Holds scratch buffers; one instance per thread of execution.
///
/// imex_em:  u_hat' = (u_hat + dt N_hat(u) + FFT[Phi(u) dW]) / (1 - dt i k^3 + dt eps k^4)
///           with the nonlinear part N explicit and the cutoff factors frozen at u.
/// explicit_em: u' = u + dt drift(u) + Phi(u) dW.
/// deterministic_rk4: classical four-stage scheme; noise must be zero.
class Stepper {
 public:
  Stepper(DriftSpec drift, const NoiseModel& noise, StepperConfig cfg, double blowup_amplitude);

  /// Advances with an explicit increment. Throws BlowUpError on non-finite
  /// state or max |u| above the blow-up amplitude.
  void advance(PathState& state, const WienerIncrement& dw);
  /// Draws the increment from state.rng, then advances.
  WienerIncrement advance(PathState& state);

  const StepperConfig& config() const noexcept { return cfg_; }

 private:
  void imex(PathState& s, const WienerIncrement& dw);
  void explicit_em(PathState& s, const WienerIncrement& dw);
  void rk4(PathState& s);

  DriftSpec spec_;
  const NoiseModel* noise_;
  StepperConfig cfg_;
  double blowup_amplitude_;
  DriftOperator op_;
  std::vector<std::complex<double>> uhat_;
  std::vector<std::complex<double>> nonlinear_;
  std::vector<std::complex<double>> noise_hat_;
};

/// One step of the given scheme (allocates a Stepper; prefer Stepper in loops).
PathState step(PathState state, const DriftSpec& drift, const NoiseModel& noise, const StepperConfig& cfg,
               double blowup_amplitude);

/// Fixed per-experiment context for run_path.
struct PathContext {
  WeightProfile weight = WeightProfile::constant(1.0);
  double window_k = 5.0;
  double lambda = 10.0;
  /// Per-step growth-bound assertion; skipped when absent.
  std::optional<W1Certificate> w1;
  std::vector<ProbePair> probes;
  /// Keep the final field in the result.
  bool keep_final_field = true;
};

/// Blow-up threshold on max |u| as a multiple of lambda.
inline constexpr double kBlowupFactor = 10.0;

/// Integrates one path from u0, emitting a record at t = 0, every
/// snapshot_every steps, and at t_end. Blow-up ends the path early with a
/// flagged record.
PathResult run_path(const Field& u0, const DriftSpec& drift, const NoiseModel& noise, const StepperConfig& cfg,
                    RngStream stream, const PathContext& ctx);

/// FNV-1a over the bytes of the increment, folded into `hash`.
std::uint64_t hash_increment(std::uint64_t hash, const WienerIncrement& dw);
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

}  // namespace skdv
