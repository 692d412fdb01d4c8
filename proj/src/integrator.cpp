// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/integrator.hpp"

#include <cmath>
#include <cstring>

#include "skdv/errors.hpp"
#include "skdv/fft.hpp"

namespace skdv {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::imex_em: return "imex_em";
    case Scheme::explicit_em: return "explicit_em";
    case Scheme::deterministic_rk4: return "deterministic_rk4";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "imex_em") return Scheme::imex_em;
  if (s == "explicit_em") return Scheme::explicit_em;
  if (s == "deterministic_rk4") return Scheme::deterministic_rk4;
  throw ConfigError("scheme must be imex_em, explicit_em or deterministic_rk4, got '" + s + "'");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("StepperConfig invariant violated: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw ConfigError("StepperConfig invariant violated: t_end must be nonnegative");
  }
  if (t_end > 0.0 && dt > t_end) throw ConfigError("StepperConfig invariant violated: dt must not exceed t_end");
  if (t_end / dt > 1e8) throw ConfigError("StepperConfig invariant violated: more than 1e8 steps");
  const double steps = std::round(t_end / dt);
  if (std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw ConfigError("StepperConfig invariant violated: t_end must be a whole number of steps");
  }
  if (snapshot_every < 1) throw ConfigError("StepperConfig invariant violated: snapshot_every must be >= 1");
}

std::uint64_t StepperConfig::step_count() const { return static_cast<std::uint64_t>(std::llround(t_end / dt)); }

Stepper::Stepper(DriftSpec drift, const NoiseModel& noise, StepperConfig cfg, double blowup_amplitude)
    : spec_(drift),
      noise_(&noise),
      cfg_(cfg),
      blowup_amplitude_(blowup_amplitude),
      op_(drift, noise.grid()),
      uhat_(noise.grid().spectrum_length()),
      nonlinear_(noise.grid().spectrum_length()),
      noise_hat_(noise.grid().spectrum_length()) {
  cfg_.validate();
  if (cfg_.scheme == Scheme::deterministic_rk4 && noise.kind() != NoiseKind::zero) {
    throw ConfigError("scheme deterministic_rk4 requires noise.kind = zero");
  }
}

namespace {
void check_amplitude(const Field& u, double limit) {
  require_finite(u, "integrator state");
  const double peak = u.max_abs();
  if (peak > limit) {
    throw BlowUpError("blow-up detected: max|u| = " + std::to_string(peak) + " exceeds " + std::to_string(limit));
  }
}
}  // namespace

void Stepper::imex(PathState& s, const WienerIncrement& dw) {
  const Grid& g = s.u.grid();
  const std::size_t half = g.n() / 2;
  CutoffFactors f;
  op_.split(s.u, uhat_, nonlinear_, f);
  const bool galerkin = spec_.variant == DriftVariant::galerkin_cutoff;
  const bool noisy = noise_->kind() != NoiseKind::zero;
  if (noisy) {
    const Field phi = apply_phi(*noise_, s.u, dw);
    RealFft::for_length(g.n()).forward(phi.values(), noise_hat_);
  }
  const double dt = cfg_.dt;
  const double eps = spec_.epsilon;
  const std::size_t top = galerkin ? std::min(spec_.m, half - 1) : half - 1;
  for (std::size_t k = 0; k <= half; ++k) {
    if (k > top) {
      uhat_[k] = 0.0;
      continue;
    }
    const double kk = g.wavenumber(static_cast<std::ptrdiff_t>(k));
    const double k3 = kk * kk * kk;
    const std::complex<double> denom{1.0 + dt * eps * f.dissipation * k3 * kk, -dt * f.dispersion * k3};
    std::complex<double> rhs = uhat_[k] + dt * nonlinear_[k];
    if (noisy) rhs += noise_hat_[k];
    uhat_[k] = rhs / denom;
  }
  RealFft::for_length(g.n()).inverse(uhat_, s.u.values());
}

void Stepper::explicit_em(PathState& s, const WienerIncrement& dw) {
  Field next = s.u + cfg_.dt * op_.evaluate(s.u);
  if (noise_->kind() != NoiseKind::zero) next += apply_phi(*noise_, s.u, dw);
  if (spec_.variant == DriftVariant::galerkin_cutoff) next = project(next, spec_.m);
  s.u = std::move(next);
}

void Stepper::rk4(PathState& s) {
  const double dt = cfg_.dt;
  const Field k1 = op_.evaluate(s.u);
  auto stage = [&](const Field& k, double c) {
    Field v = s.u + (c * dt) * k;
    if (spec_.variant == DriftVariant::galerkin_cutoff) v = project(v, spec_.m);
    return v;
  };
  const Field k2 = op_.evaluate(stage(k1, 0.5));
  const Field k3 = op_.evaluate(stage(k2, 0.5));
  const Field k4 = op_.evaluate(stage(k3, 1.0));
  Field next = s.u;
  for (std::size_t j = 0; j < next.size(); ++j) next[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  if (spec_.variant == DriftVariant::galerkin_cutoff) next = project(next, spec_.m);
  s.u = std::move(next);
}

void Stepper::advance(PathState& state, const WienerIncrement& dw) {
  require_finite(state.u, "integrator state");
  if (noise_->kind() != NoiseKind::zero && dw.xi.size() != noise_->modes()) {
    throw PreconditionError("step: increment mode count does not match the noise model");
  }
  switch (cfg_.scheme) {
    case Scheme::imex_em: imex(state, dw); break;
    case Scheme::explicit_em: explicit_em(state, dw); break;
    case Scheme::deterministic_rk4: rk4(state); break;
  }
  ++state.step;
  state.t = static_cast<double>(state.step) * cfg_.dt;
  check_amplitude(state.u, blowup_amplitude_);
}

WienerIncrement Stepper::advance(PathState& state) {
  WienerIncrement dw{cfg_.dt, {}};
  if (noise_->kind() != NoiseKind::zero) {
    dw = sample_increment(state.rng, cfg_.dt, noise_->modes());
  } else {
    state.rng.advance();
  }
  advance(state, dw);
  return dw;
}

PathState step(PathState state, const DriftSpec& drift, const NoiseModel& noise, const StepperConfig& cfg,
               double blowup_amplitude) {
  Stepper stepper(drift, noise, cfg, blowup_amplitude);
  stepper.advance(state);
  return state;
}

std::uint64_t hash_increment(std::uint64_t hash, const WienerIncrement& dw) {
  for (double v : dw.xi) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      hash ^= b;
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

PathResult run_path(const Field& u0, const DriftSpec& drift, const NoiseModel& noise, const StepperConfig& cfg,
                    RngStream stream, const PathContext& ctx) {
  cfg.validate();
  require_finite(u0, "initial condition");
  if (drift.variant == DriftVariant::galerkin_cutoff && !is_band_limited(u0, drift.m, 1e-10)) {
    throw PreconditionError("run_path: galerkin initial condition must be pre-projected");
  }
  PathResult result;
  result.path_index = stream.path();
  result.draw_hash = kFnvOffset;
  Recorder recorder(ctx.weight, noise, drift, ctx.window_k, ctx.probes);
  Stepper stepper(drift, noise, cfg, kBlowupFactor * ctx.lambda);
  PathState state{0.0, u0, stream, 0};

  auto check_w1 = [&](const Field& u) {
    if (!ctx.w1 || noise.kind() == NoiseKind::zero) return;
    result.w1_utilization = std::max(result.w1_utilization, ctx.w1->utilization(noise, u));
    assert_w1(noise, *ctx.w1, u);
  };

  const std::uint64_t total = cfg.step_count();
  try {
    check_w1(state.u);
    result.records.push_back(recorder.record(state.t, state.u, result.probes));
    for (std::uint64_t n = 0; n < total; ++n) {
      const WienerIncrement dw = stepper.advance(state);
      if (noise.kind() != NoiseKind::zero) result.draw_hash = hash_increment(result.draw_hash, dw);
      check_w1(state.u);
      if (state.step % cfg.snapshot_every == 0 || state.step == total) {
        result.records.push_back(recorder.record(state.t, state.u, result.probes));
      }
    }
  } catch (const BlowUpError& e) {
    result.blew_up = true;
    result.blow_up_reason = e.what();
    DiagnosticsRecord r;
    r.t = state.t;
    r.l2_sq = r.h1_sq = r.h2_sq = r.h1_window_sq = r.f_value = NAN;
    r.ito_drift_term = r.ito_trace_term = r.boundary_contamination = NAN;
    r.blow_up = true;
    result.records.push_back(r);
    return result;
  }
  if (ctx.keep_final_field) result.final_field = state.u;
  return result;
}

}  // namespace skdv
