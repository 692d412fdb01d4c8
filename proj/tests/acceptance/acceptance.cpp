// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "skdv/config.hpp"
#include "skdv/diagnostics.hpp"
#include "skdv/dynamics.hpp"
#include "skdv/ensemble.hpp"
#include "skdv/errors.hpp"
#include "skdv/integrator.hpp"
#include "skdv/verify.hpp"

namespace {

using namespace skdv;

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double l2(const Field& f) { return std::sqrt(inner(f, f)); }

Field gaussian(const Grid& g, double amp, double width) {
  return Field::from_function(g, [&](double x) { return amp * std::exp(-x * x / (width * width)); });
}

NoiseModel zero_noise(const Grid& g) { return NoiseModel(NoiseParams{NoiseKind::zero, 0.0, 2.5, 4, 5.0}, g); }

PathState integrate_deterministic(const Field& u0, DriftSpec drift, Scheme scheme, double dt, double t_end) {
  const NoiseModel noise = zero_noise(u0.grid());
  const StepperConfig cfg{dt, t_end, scheme, 1};
  Stepper st(drift, noise, cfg, 1e6);
  PathState s{0.0, u0, RngStream(0, 0), 0};
  for (std::uint64_t i = 0; i < cfg.step_count(); ++i) st.advance(s);
  return s;
}

// 1. Weighted integration-by-parts identities and their refinement behavior.
Outcome identities() {
  constexpr std::size_t kFields = 100;
  constexpr double kTol = 1e-8;
  const Grid coarse(256, 40.0);
  const Grid fine(512, 40.0);
  const std::vector<WeightProfile> profiles = {WeightProfile::atan(5.0), WeightProfile::periodic_sine(40.0)};
  Outcome out{true, {}};
  for (const WeightProfile& p : profiles) {
    double worst_scaled = 0.0;
    double worst_coarse = 0.0;
    double worst_fine = 0.0;
    for (std::size_t i = 0; i < kFields; ++i) {
      const Field u = random_smooth_field(coarse, 2026, i);
      const double h2 = std::sqrt(sobolev_norm_sq(u, 2));
      const double r = ibp_identity_residuals(u, p).max();
      worst_scaled = std::max(worst_scaled, r / (1.0 + h2 * h2 * h2));
      worst_coarse = std::max(worst_coarse, r);
      const Field uf = random_smooth_field(fine, 2026, i, coarse.spacing());
      worst_fine = std::max(worst_fine, ibp_identity_residuals(uf, p).max());
    }
    const double reduction = worst_fine > 0.0 ? worst_coarse / worst_fine : INFINITY;
    out.pass = out.pass && worst_scaled < kTol && reduction >= 10.0;
    out.summary += p.name() + ": scaled residual " + fmt(worst_scaled) + " (tol " + fmt(kTol) +
                   "), refinement reduction " + fmt(reduction) + "x (need >= 10x); ";
  }
  return out;
}

// 2. Cutoff-Galerkin drift against the regularized drift and a pointwise oracle.
Outcome galerkin() {
  const Grid g(128, 40.0);
  const double eps = 0.1;
  const std::size_t m = 16;
  // Identity regime: small, band-limited field.
  const Field small = project(gaussian(g, 0.05, 3.0), m);
  DriftOperator op({DriftVariant::galerkin_cutoff, eps, m}, g);
  const CutoffFactors f1 = op.cutoffs(small);
  const bool all_one = f1.dissipation == 1.0 && f1.advection == 1.0 && f1.dispersion == 1.0 && f1.gradient == 1.0;
  const Field ref = project(drift_regularized(small, eps), m);
  const double diff = (drift_galerkin(small, eps, m) - ref).max_abs();
  const double tol = 1e-12 * (1.0 + ref.max_abs());

  // Large field: every factor is zero, so the whole drift must vanish.
  const Field big = project(gaussian(g, 50.0, 1.0), m);
  const CutoffFactors f0 = op.cutoffs(big);
  const bool all_zero = f0.dissipation == 0.0 && f0.advection == 0.0 && f0.dispersion == 0.0 && f0.gradient == 0.0;
  const double big_drift = drift_galerkin(big, eps, m).max_abs();

  // Only the third-order terms cut: compare with the surviving terms evaluated
  // pointwise (products of modes <= m are exact on this grid).
  const double k8 = 2.0 * std::numbers::pi * 8.0 / 40.0;
  const Field mixed = Field::from_function(g, [&](double x) { return 0.6 * std::sin(k8 * x) + 0.05 * std::cos(k8 * x / 8.0); });
  constexpr std::size_t m8 = 8;
  DriftOperator op8({DriftVariant::galerkin_cutoff, eps, m8}, g);
  const CutoffFactors fm = op8.cutoffs(mixed);
  const Field u1 = derivative(mixed, 1), u2 = derivative(mixed, 2), u4 = derivative(mixed, 4);
  Field oracle = eps * fm.dissipation * u4 + fm.advection * hadamard(mixed, u1) + 3.0 * fm.gradient * hadamard(u1, u2);
  oracle = project(-1.0 * oracle, m8);
  const double partial = (drift_galerkin(mixed, eps, m8) - oracle).max_abs();
  const double partial_tol = 1e-10 * (1.0 + oracle.max_abs());

  Outcome out;
  out.pass = all_one && diff <= tol && all_zero && big_drift == 0.0 && fm.dispersion == 0.0 && partial <= partial_tol;
  out.summary = "theta=1 deviation " + fmt(diff) + " (tol " + fmt(tol) + "); theta=0 drift " + fmt(big_drift) +
                " (need 0); third-order cut deviation " + fmt(partial) + " (tol " + fmt(partial_tol) + ")";
  return out;
}

// 3. Mass conservation of the deterministic equation.
Outcome mass() {
  const Grid g(256, 40.0);
  const Field u0 = gaussian(g, 0.5, 2.0);
  const double m0 = integrate(u0);
  const PathState end = integrate_deterministic(u0, {DriftVariant::kdv2, 0.0, 8}, Scheme::imex_em, 1e-4, 1.0);
  const double rel = std::abs(integrate(end.u) - m0) / std::abs(m0);
  return {rel < 1e-8, "relative mass drift " + fmt(rel) + " (tol 1e-08)"};
}

// 4. Growth-bound certificate on a multiplicative-noise run.
Outcome w1() {
  SimConfig cfg;
  cfg.noise.kind = NoiseKind::diagonal_multiplicative;
  cfg.initial.amplitude = 2.0;
  cfg.stepper.t_end = 1.0;  // 1000 steps at dt = 1e-3
  const NoiseModel noise = cfg.noise_model();
  const W1Certificate cert = certify_w1(noise, default_w1_trials(noise, cfg.lambda));
  PathContext ctx;
  ctx.weight = cfg.weight().profile();
  ctx.window_k = cfg.window_k;
  ctx.lambda = cfg.lambda;
  ctx.w1 = cert;
  ctx.keep_final_field = false;
  const PathResult r = run_path(cfg.initial_field(), cfg.drift, noise, cfg.stepper, RngStream(cfg.seed, 0), ctx);
  const std::uint64_t steps = cfg.stepper.step_count();
  const bool constants_ok = cert.kappa1 <= cert.kappa1_analytic * (1 + 1e-12) &&
                            cert.kappa2 <= cert.kappa2_analytic * (1 + 1e-12);
  const bool pass = !r.blew_up && steps == 1000 && constants_ok && r.w1_utilization <= cert.margin &&
                    cert.margin <= 1.1;
  return {pass, std::to_string(steps) + " steps, peak utilization " + fmt(r.w1_utilization) + " (limit " +
                    fmt(cert.margin) + "), kappa1 " + fmt(cert.kappa1) + " <= " + fmt(cert.kappa1_analytic) +
                    ", kappa2 " + fmt(cert.kappa2) + " <= " + fmt(cert.kappa2_analytic)};
}

EnsembleRun additive_ensemble(std::size_t paths) {
  SimConfig cfg;  // n = 128, T = 0.5, dt = 1e-3, additive noise
  const Grid grid = cfg.grid();
  EnsembleConfig ec;
  ec.base = cfg;
  ec.paths = paths;
  ec.keep_paths = true;
  const Field e0 = basis_mode(grid, 0);
  ec.probes.push_back({e0, e0});
  ec.probes.push_back({bump_probe(grid, -3.0, 3.0), bump_probe(grid, 3.0, 3.0)});
  return run_ensemble(ec);
}

// 5. Ito budget of the weighted functional.
Outcome ito(const EnsembleRun& run) {
  const BudgetReport b = ito_budget_check(run.paths);
  return {b.pass && !b.underpowered && b.paths == 10000,
          std::to_string(b.paths) + " paths, signal " + fmt(b.signal) + ", predicted " + fmt(b.predicted) +
              ", |discrepancy| " + fmt(std::abs(b.discrepancy)) + " (tol 3 SE + 2% = " + fmt(b.tolerance) + ")"};
}

// 6. Martingale and quadratic-variation probes on the same ensemble.
Outcome martingale(const EnsembleRun& run) {
  const auto& records = run.paths.front().records;
  const double s = records[records.size() / 2].t;
  const double t = records.back().t;
  Outcome out{true, "s=" + fmt(s) + " t=" + fmt(t) + "; "};
  for (std::size_t probe = 0; probe < 2; ++probe) {
    const MartingaleReport m = martingale_probe(run.paths, s, t, probe);
    out.pass = out.pass && m.increment_pass && m.qv_pass;
    out.summary += (probe == 0 ? "constant mode" : "bump pair") + std::string(": increment ") +
                   fmt(std::abs(m.mean_increment)) + " (3 SE " + fmt(3 * m.increment_se) + "), QV gap " +
                   fmt(std::abs(m.qv_discrepancy)) + " (3 SE " + fmt(3 * m.qv_discrepancy_se) + "); ";
    if (probe == 0) {
      const double q0 = SimConfig{}.noise_model().weights()[0];
      const double closed = q0 * q0 * (t - s);
      const double rel = std::abs(m.realized_qv - closed) / closed;
      out.pass = out.pass && rel <= 0.05;
      out.summary += "closed form rel. error " + fmt(rel) + " (tol 0.05); ";
    }
  }
  return out;
}

// 7. Moment estimators across the vanishing-viscosity sweep.
Outcome moments() {
  EnsembleConfig ec;
  ec.paths = 1000;
  const SweepTable table = sweep_epsilon(ec, {1e-1, 1e-2, 1e-3});
  double lo = INFINITY, hi = 0.0;
  bool finite = true;
  double worst_blowup = 0.0;
  std::string detail;
  for (const SweepRow& row : table.rows) {
    lo = std::min(lo, row.moments.est_4a);
    hi = std::max(hi, row.moments.est_4a);
    finite = finite && std::isfinite(row.moments.est_4a) && std::isfinite(row.moments.est_4c);
    worst_blowup = std::max(worst_blowup, row.moments.blowup_fraction);
    detail += "eps=" + fmt(row.epsilon) + " est_4a=" + fmt(row.moments.est_4a) + " est_4c=" +
              fmt(row.moments.est_4c) + "; ";
  }
  const double ratio = hi / lo;
  return {finite && ratio <= 1.5 && worst_blowup < 0.01 && table.common_draws,
          detail + "est_4a max/min " + fmt(ratio) + " (tol 1.5), blow-up " + fmt(worst_blowup) + " (tol 0.01)"};
}

// 8. Strong order with additive noise and deterministic first-order self-convergence.
Outcome convergence() {
  const Grid g(32, 40.0);
  const DriftSpec drift{DriftVariant::regularized, 0.1, 16};
  const Field u0 = gaussian(g, 0.5, 3.0);

  const NoiseModel noise(NoiseParams{NoiseKind::additive, 0.5, 2.5, 8, 5.0}, g);
  const double t_end = 0.1;
  const double fine_dt = 1e-5;
  const std::size_t fine_steps = 10000;
  const std::vector<std::size_t> ratios{1000, 100, 10};
  const std::size_t paths = 10;
  std::vector<double> err(ratios.size(), 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    std::vector<WienerIncrement> increments;
    RngStream rs(31, p);
    for (std::size_t i = 0; i < fine_steps; ++i) increments.push_back(sample_increment(rs, fine_dt, noise.modes()));
    Stepper ref_st(drift, noise, {fine_dt, t_end, Scheme::imex_em, 1}, 1e6);
    PathState ref{0.0, u0, RngStream(0, 0), 0};
    for (const auto& dw : increments) ref_st.advance(ref, dw);
    for (std::size_t r = 0; r < ratios.size(); ++r) {
      const double dt = fine_dt * static_cast<double>(ratios[r]);
      Stepper st(drift, noise, {dt, t_end, Scheme::imex_em, 1}, 1e6);
      PathState s{0.0, u0, RngStream(0, 0), 0};
      for (std::size_t i = 0; i < fine_steps; i += ratios[r]) {
        WienerIncrement dw{dt, std::vector<double>(noise.modes(), 0.0)};
        for (std::size_t j = i; j < i + ratios[r]; ++j) {
          for (std::size_t k = 0; k < noise.modes(); ++k) dw.xi[k] += increments[j].xi[k];
        }
        st.advance(s, dw);
      }
      const double e = l2(s.u - ref.u);
      err[r] += e * e / static_cast<double>(paths);
    }
  }
  const double order = (0.5 * std::log(err.back()) - 0.5 * std::log(err.front())) /
                       (std::log(fine_dt * double(ratios.back())) - std::log(fine_dt * double(ratios.front())));

  const Field oracle = integrate_deterministic(u0, drift, Scheme::deterministic_rk4, 1e-4, 1.0).u;
  std::vector<double> det;
  for (double dt : {0.02, 0.01, 0.005}) det.push_back(l2(integrate_deterministic(u0, drift, Scheme::imex_em, dt, 1.0).u - oracle));
  const double r1 = det[0] / det[1];
  const double r2 = det[1] / det[2];
  const bool pass = order >= 0.45 && std::abs(r1 - 2.0) <= 0.2 && std::abs(r2 - 2.0) <= 0.2;
  return {pass, "strong order " + fmt(order) + " (need >= 0.45), deterministic ratios " + fmt(r1) + ", " + fmt(r2) +
                    " (need 2.0 +- 0.2)"};
}

// 9. Worker count does not change any stored bit.
Outcome reproducibility() {
  EnsembleConfig ec;
  ec.paths = 32;
  ec.keep_paths = true;
  ec.base.noise.kind = NoiseKind::diagonal_multiplicative;
  const Grid grid = ec.base.grid();
  ec.probes.push_back({bump_probe(grid, -3.0, 3.0), bump_probe(grid, 3.0, 3.0)});
  ec.workers = 1;
  const EnsembleRun one = run_ensemble(ec);
  ec.workers = 8;
  const EnsembleRun eight = run_ensemble(ec);
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < one.paths.size(); ++i) {
    if (!bitwise_equal(one.paths[i], eight.paths[i])) ++mismatched;
  }
  const bool same_stats = stats_json(one.stats, ec.base) == stats_json(eight.stats, ec.base);
  return {mismatched == 0 && same_stats && one.paths.size() == 32,
          std::to_string(mismatched) + " of 32 paths differ, aggregate JSON " + (same_stats ? "identical" : "differs")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, double budget_s, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s [%.1f s, budget %.0f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.summary.c_str(), secs,
                budget_s);
    std::fflush(stdout);
  };

  report(1, "integration-by-parts identities", 10, identities);
  report(2, "cutoff-Galerkin consistency", 1, galerkin);
  report(3, "mass conservation", 30, mass);
  report(4, "noise growth certificate", 30, w1);

  EnsembleRun run;
  report(5, "Ito budget", 300, [&] {
    run = additive_ensemble(10000);
    return ito(run);
  });
  report(6, "martingale and QV probes", 300, [&] {
    if (run.paths.empty()) return Outcome{false, "ensemble unavailable"};
    return martingale(run);
  });
  run = EnsembleRun{};
  report(7, "moment-bound trend", 300, moments);
  report(8, "integrator convergence", 60, convergence);
  report(9, "reproducibility across workers", 60, reproducibility);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
