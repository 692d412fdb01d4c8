// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "skdv/ensemble.hpp"
#include "skdv/errors.hpp"
#include "skdv/rng.hpp"

namespace skdv {

namespace {

constexpr std::size_t kIdentityFields = 100;
constexpr double kIdentityTolerance = 1e-8;
constexpr double kClosedFormTolerance = 0.05;
constexpr double kMaxBlowupFraction = 0.01;

double uniform(std::uint64_t seed, std::uint64_t index, std::uint32_t slot) {
  const auto bits = philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                0x5eed5eedu, slot},
                               {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<double>(bits[0]) + 0.5) / 4294967296.0;
}

CheckResult check(std::string name, double measured, double tol, bool pass, std::string detail = {}) {
  return {std::move(name), measured, tol, pass, std::move(detail)};
}

void identities(const SimConfig& cfg, VerifyReport& rep) {
  const Grid grid = cfg.grid();
  const WeightFunction configured = cfg.weight();
  const std::vector<WeightProfile> profiles = {configured.profile(), WeightProfile::constant(1.0)};
  for (const WeightProfile& p : profiles) {
    double worst_ratio = 0.0;
    double worst_residual = 0.0;
    for (std::size_t i = 0; i < kIdentityFields; ++i) {
      const Field u = random_smooth_field(grid, cfg.seed, i);
      const double h2 = std::sqrt(sobolev_norm_sq(u, 2));
      const double scale = 1.0 + h2 * h2 * h2;
      const double r = ibp_identity_residuals(u, p).max();
      worst_residual = std::max(worst_residual, r);
      worst_ratio = std::max(worst_ratio, r / scale);
    }
    rep.checks.push_back(check("identities." + p.name() + ".scaled_residual", worst_ratio, kIdentityTolerance,
                               worst_ratio < kIdentityTolerance,
                               "max residual " + format_double(worst_residual)));
  }
}

void noise_w1(const SimConfig& cfg, VerifyReport& rep) {
  const NoiseModel noise = cfg.noise_model();
  const auto trials = default_w1_trials(noise, cfg.lambda);
  const W1Certificate cert = certify_w1(noise, trials);
  rep.checks.push_back(check("noise_w1.kappa1", cert.kappa1, cert.kappa1_analytic,
                             cert.kappa1 <= cert.kappa1_analytic * (1.0 + 1e-12)));
  rep.checks.push_back(check("noise_w1.kappa2", cert.kappa2, cert.kappa2_analytic,
                             cert.kappa2 <= cert.kappa2_analytic * (1.0 + 1e-12)));
  double worst = 0.0;
  for (const Field& u : trials) worst = std::max(worst, cert.utilization(noise, u));
  rep.checks.push_back(check("noise_w1.trial_utilization", worst, cert.margin, worst <= cert.margin));

  // Short path with the per-step assertion active.
  PathContext ctx;
  ctx.weight = cfg.weight().profile();
  ctx.window_k = cfg.window_k;
  ctx.lambda = cfg.lambda;
  ctx.w1 = cert;
  ctx.keep_final_field = false;
  StepperConfig sc = cfg.stepper;
  const std::uint64_t steps = std::min<std::uint64_t>(sc.step_count(), 1000);
  sc.t_end = static_cast<double>(steps) * sc.dt;
  double util = 0.0;
  std::string detail;
  bool ok = true;
  try {
    const PathResult r = run_path(cfg.initial_field(), cfg.drift, noise, sc, RngStream(cfg.seed, 0), ctx);
    util = r.w1_utilization;
    if (r.blew_up) detail = "path blew up: " + r.blow_up_reason;
  } catch (const NumericalError& e) {
    ok = false;
    detail = e.what();
  }
  rep.checks.push_back(check("noise_w1.path_utilization", util, cert.margin, ok && util <= cert.margin, detail));
}

EnsembleRun ensemble_with_probes(const SimConfig& cfg) {
  const Grid grid = cfg.grid();
  EnsembleConfig ec;
  ec.base = cfg;
  ec.paths = cfg.paths;
  ec.workers = cfg.workers;
  ec.keep_paths = true;
  const Field e0 = basis_mode(grid, 0);
  ec.probes.push_back({e0, e0});
  const double half = std::min(3.0, grid.length() / 8.0);
  ec.probes.push_back({bump_probe(grid, -half, half), bump_probe(grid, half, half)});
  return run_ensemble(ec);
}

void martingale(const SimConfig& cfg, const EnsembleRun& run, VerifyReport& rep) {
  const auto& records = run.paths.front().records;
  if (records.size() < 3) throw ConfigError("verify martingale: need at least three snapshots");
  const double s = records[records.size() / 2].t;
  const double t = records.back().t;
  for (std::size_t probe = 0; probe < 2; ++probe) {
    const std::string tag = probe == 0 ? "martingale.constant_mode" : "martingale.bump_pair";
    const MartingaleReport m = martingale_probe(run.paths, s, t, probe);
    rep.checks.push_back(check(tag + ".mean_increment", std::abs(m.mean_increment), 3.0 * m.increment_se,
                               m.increment_pass));
    rep.checks.push_back(check(tag + ".qv_discrepancy", std::abs(m.qv_discrepancy), 3.0 * m.qv_discrepancy_se,
                               m.qv_pass));
    if (probe == 0 && cfg.noise.kind == NoiseKind::additive) {
      const double q0 = cfg.noise_model().weights()[0];
      const double closed = q0 * q0 * (t - s);
      const double rel = std::abs(m.realized_qv - closed) / closed;
      rep.checks.push_back(check(tag + ".closed_form_qv", rel, kClosedFormTolerance, rel <= kClosedFormTolerance,
                                 "realized " + format_double(m.realized_qv) + " closed form " +
                                     format_double(closed)));
    }
  }
}

void ito_budget(const EnsembleRun& run, VerifyReport& rep) {
  const BudgetReport b = ito_budget_check(run.paths);
  std::string detail = "signal " + format_double(b.signal) + " predicted " + format_double(b.predicted);
  if (b.underpowered) detail += " (underpowered: fewer than 1000 paths)";
  rep.checks.push_back(check("ito_budget.discrepancy", std::abs(b.discrepancy), b.tolerance, b.pass, detail));
}

void moments(const EnsembleRun& run, VerifyReport& rep) {
  const auto& m = run.stats.moments;
  if (!m) {
    rep.checks.push_back(check("moments.defined", 0.0, 1.0, false, "every path blew up"));
    return;
  }
  rep.checks.push_back(check("moments.est_4a_finite", m->est_4a, 0.0, std::isfinite(m->est_4a)));
  rep.checks.push_back(check("moments.est_4c_finite", m->est_4c, 0.0, std::isfinite(m->est_4c)));
  rep.checks.push_back(check("moments.blowup_fraction", m->blowup_fraction, kMaxBlowupFraction,
                             m->blowup_fraction < kMaxBlowupFraction));
}

}  // namespace

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerifyReport::first_failure() const {
  for (const CheckResult& c : checks) {
    if (!c.pass) return &c;
  }
  return nullptr;
}

std::string VerifyReport::to_json() const {
  using nlohmann::ordered_json;
  auto num = [](double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); };
  ordered_json j;
  j["suite"] = suite;
  j["pass"] = pass();
  ordered_json arr = ordered_json::array();
  for (const CheckResult& c : checks) {
    ordered_json o;
    o["name"] = c.name;
    o["pass"] = c.pass;
    o["measured"] = num(c.measured);
    o["tolerance"] = num(c.tolerance);
    if (!c.detail.empty()) o["detail"] = c.detail;
    arr.push_back(o);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

Field random_smooth_field(const Grid& grid, std::uint64_t seed, std::uint64_t index,
                          std::optional<double> width_unit) {
  const double h = width_unit.value_or(grid.spacing());
  const double reach = grid.length() / 8.0;
  const int bumps = 1 + static_cast<int>(uniform(seed, index, 0) * 3.0);
  std::vector<double> amp(bumps);
  std::vector<double> width(bumps);
  std::vector<double> center(bumps);
  for (int b = 0; b < bumps; ++b) {
    const auto slot = static_cast<std::uint32_t>(1 + 4 * b);
    const double sign = uniform(seed, index, slot + 3) < 0.5 ? -1.0 : 1.0;
    amp[b] = sign * (0.5 + 1.5 * uniform(seed, index, slot));
    width[b] = h * (2.0 + 2.0 * uniform(seed, index, slot + 1));
    center[b] = reach * (2.0 * uniform(seed, index, slot + 2) - 1.0);
  }
  return Field::from_function(grid, [&](double x) {
    double v = 0.0;
    for (int b = 0; b < bumps; ++b) {
      const double z = (x - center[b]) / width[b];
      v += amp[b] * std::exp(-0.5 * z * z);
    }
    return v;
  });
}

VerifyReport run_verify(const std::string& suite, const SimConfig& cfg) {
  const auto& names = verify_suites();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw ConfigError("unknown verify suite '" + suite + "'");
  }
  cfg.validate();
  VerifyReport rep;
  rep.suite = suite;
  const bool all = suite == "all";
  if (all || suite == "identities") identities(cfg, rep);
  if (all || suite == "noise_w1") noise_w1(cfg, rep);
  if (all || suite == "martingale" || suite == "ito_budget" || suite == "moments") {
    const EnsembleRun run = ensemble_with_probes(cfg);
    if (all || suite == "martingale") martingale(cfg, run, rep);
    if (all || suite == "ito_budget") ito_budget(run, rep);
    if (all || suite == "moments") moments(run, rep);
  }
  return rep;
}

}  // namespace skdv
