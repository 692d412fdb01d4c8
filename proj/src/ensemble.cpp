// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "skdv/errors.hpp"
#include "skdv/integrator.hpp"

namespace skdv {

namespace {

constexpr const char* kSeriesNames[] = {"l2", "h1", "h2", "h1_win", "F", "ito_drift", "ito_trace", "bc"};

double series_value(const DiagnosticsRecord& r, std::size_t i) {
  switch (i) {
    case 0: return r.l2_sq;
    case 1: return r.h1_sq;
    case 2: return r.h2_sq;
    case 3: return r.h1_window_sq;
    case 4: return r.f_value;
    case 5: return r.ito_drift_term;
    case 6: return r.ito_trace_term;
    default: return r.boundary_contamination;
  }
}

struct Prepared {
  Field u0;
  NoiseModel noise;
  PathContext ctx;
};

Prepared prepare(const EnsembleConfig& cfg) {
  if (cfg.paths < 1) throw ConfigError("EnsembleConfig invariant violated: paths must be >= 1");
  if (cfg.workers < 1) throw ConfigError("EnsembleConfig invariant violated: workers must be >= 1");
  cfg.base.validate();
  for (const SweepPoint& p : cfg.sweep) {
    DriftSpec d = cfg.base.drift;
    d.epsilon = p.epsilon;
    d.m = p.m;
    d.validate();
  }
  NoiseModel noise = cfg.base.noise_model();
  const WeightFunction weight = cfg.base.weight();
  PathContext ctx;
  ctx.weight = weight.profile();
  ctx.window_k = cfg.base.window_k;
  ctx.lambda = cfg.base.lambda;
  const auto trials = default_w1_trials(noise, cfg.base.lambda);
  ctx.w1 = certify_w1(noise, trials);
  ctx.probes = cfg.probes;
  ctx.keep_final_field = cfg.keep_paths;
  return {cfg.base.initial_field(), std::move(noise), std::move(ctx)};
}

template <typename Body>
void for_each_path(std::size_t paths, std::size_t workers, bool parallel, Body&& body) {
  std::vector<std::exception_ptr> errors(paths);
  const auto count = static_cast<std::int64_t>(paths);
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(workers))
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EnsembleRun run_impl(const EnsembleConfig& cfg, bool parallel) {
  Prepared prep = prepare(cfg);
  std::vector<PathResult> results(cfg.paths);
  const SimConfig& base = cfg.base;
  for_each_path(cfg.paths, cfg.workers, parallel, [&](std::size_t i) {
    results[i] = run_path(prep.u0, base.drift, prep.noise, base.stepper, RngStream(base.seed, i), prep.ctx);
  });
  EnsembleRun run;
  run.w1 = *prep.ctx.w1;
  run.stats = aggregate(results, base.drift.epsilon);
  if (cfg.keep_paths) run.paths = std::move(results);
  return run;
}

}  // namespace

EnsembleStats aggregate(std::vector<PathResult>& paths, double epsilon) {
  std::sort(paths.begin(), paths.end(),
            [](const PathResult& a, const PathResult& b) { return a.path_index < b.path_index; });
  EnsembleStats stats;
  stats.paths = paths.size();
  std::size_t snapshots = 0;
  std::size_t blown = 0;
  for (const PathResult& p : paths) {
    if (p.blew_up) ++blown;
    if (p.records.size() > snapshots) {
      snapshots = p.records.size();
      stats.times.clear();
      for (const auto& r : p.records) stats.times.push_back(r.t);
    }
  }
  stats.blowup_fraction = paths.empty() ? 0.0 : static_cast<double>(blown) / static_cast<double>(paths.size());
  for (std::size_t f = 0; f < std::size(kSeriesNames); ++f) {
    SeriesStats s;
    s.mean.assign(snapshots, 0.0);
    s.var.assign(snapshots, 0.0);
    s.se.assign(snapshots, 0.0);
    s.count.assign(snapshots, 0);
    for (std::size_t k = 0; k < snapshots; ++k) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const PathResult& p : paths) {
        if (k < p.records.size() && !p.records[k].blow_up) {
          sum += series_value(p.records[k], f);
          ++n;
        }
      }
      const double mean = n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
      double ss = 0.0;
      for (const PathResult& p : paths) {
        if (k < p.records.size() && !p.records[k].blow_up) {
          const double d = series_value(p.records[k], f) - mean;
          ss += d * d;
        }
      }
      s.mean[k] = mean;
      s.count[k] = n;
      if (n >= 2) {
        s.var[k] = ss / static_cast<double>(n - 1);
        s.se[k] = std::sqrt(s.var[k] / static_cast<double>(n));
      } else {
        s.var[k] = std::numeric_limits<double>::quiet_NaN();
        s.se[k] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    stats.series.emplace(kSeriesNames[f], std::move(s));
  }
  if (blown < paths.size()) stats.moments = moment_estimators(paths, epsilon);
  return stats;
}

EnsembleRun run_ensemble(const EnsembleConfig& cfg) { return run_impl(cfg, true); }
EnsembleRun run_ensemble_serial(const EnsembleConfig& cfg) { return run_impl(cfg, false); }

namespace {
struct Snapshots {
  std::vector<double> t;
  std::vector<Field> u;
};

double trajectory_distance(const Snapshots& a, const Snapshots& b) {
  if (a.t.size() != b.t.size()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> d2(a.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    const Field diff = a.u[i] - b.u[i];
    d2[i] = inner(diff, diff);
  }
  return std::sqrt(trapezoid(a.t, d2));
}
}  // namespace

SweepTable run_sweep(const EnsembleConfig& cfg) {
  if (cfg.sweep.empty()) throw ConfigError("sweep: at least one (epsilon, m) point required");
  Prepared prep = prepare(cfg);
  const SimConfig& base = cfg.base;
  const std::size_t points = cfg.sweep.size();
  std::vector<std::vector<PathResult>> results(points, std::vector<PathResult>(cfg.paths));
  std::vector<std::vector<double>> distances(points, std::vector<double>(cfg.paths, 0.0));

  for_each_path(cfg.paths, cfg.workers, true, [&](std::size_t i) {
    Snapshots prev;
    for (std::size_t s = 0; s < points; ++s) {
      DriftSpec drift = base.drift;
      drift.epsilon = cfg.sweep[s].epsilon;
      drift.m = cfg.sweep[s].m;
      const Field u0 = drift.variant == DriftVariant::galerkin_cutoff ? project(prep.u0, drift.m) : prep.u0;

      // Run the path manually so the snapshot fields are available for distances.
      Snapshots snaps;
      PathContext ctx = prep.ctx;
      ctx.keep_final_field = false;
      Recorder recorder(ctx.weight, prep.noise, drift, ctx.window_k);
      Stepper stepper(drift, prep.noise, base.stepper, kBlowupFactor * ctx.lambda);
      PathState state{0.0, u0, RngStream(base.seed, i), 0};
      PathResult& res = results[s][i];
      res.path_index = i;
      res.draw_hash = kFnvOffset;
      const std::uint64_t total = base.stepper.step_count();
      try {
        res.records.push_back(recorder.record(0.0, state.u));
        snaps.t.push_back(0.0);
        snaps.u.push_back(state.u);
        for (std::uint64_t n = 0; n < total; ++n) {
          const WienerIncrement dw = stepper.advance(state);
          if (prep.noise.kind() != NoiseKind::zero) {
            res.draw_hash = hash_increment(res.draw_hash, dw);
            assert_w1(prep.noise, *ctx.w1, state.u);
          }
          if (state.step % base.stepper.snapshot_every == 0 || state.step == total) {
            res.records.push_back(recorder.record(state.t, state.u));
            snaps.t.push_back(state.t);
            snaps.u.push_back(state.u);
          }
        }
      } catch (const BlowUpError& e) {
        res.blew_up = true;
        res.blow_up_reason = e.what();
        snaps.t.clear();
      }
      distances[s][i] = (s == 0 || res.blew_up || prev.t.empty()) ? std::numeric_limits<double>::quiet_NaN()
                                                                   : trajectory_distance(prev, snaps);
      prev = std::move(snaps);
    }
  });

  SweepTable table;
  for (std::size_t s = 0; s < points; ++s) {
    SweepRow row;
    row.epsilon = cfg.sweep[s].epsilon;
    row.m = cfg.sweep[s].m;
    row.moments = moment_estimators(results[s], row.epsilon);
    double sum = 0.0;
    std::size_t n = 0;
    for (double d : distances[s]) {
      if (std::isfinite(d)) {
        sum += d;
        ++n;
      }
    }
    row.distance_to_previous = n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back(row);
  }
  for (std::size_t i = 0; i < cfg.paths; ++i) {
    for (std::size_t s = 1; s < points; ++s) {
      if (results[s][i].draw_hash != results[0][i].draw_hash) table.common_draws = false;
    }
  }
  return table;
}

SweepTable sweep_epsilon(EnsembleConfig cfg, const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw ConfigError("sweep: epsilon list must be non-empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ConfigError("sweep: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ConfigError("sweep: epsilons must be decreasing");
  }
  cfg.sweep.clear();
  for (double e : epsilons) cfg.sweep.push_back({e, cfg.base.drift.m});
  return run_sweep(cfg);
}

std::string sweep_csv(const SweepTable& table) {
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); };
  std::string out = "epsilon,m,est_4a,est_4a_se,est_4c,est_4c_se,blowup_frac\n";
  for (const SweepRow& r : table.rows) {
    out += num(r.epsilon) + "," + std::to_string(r.m) + "," + num(r.moments.est_4a) + "," +
           num(r.moments.est_4a_se) + "," + num(r.moments.est_4c) + "," + num(r.moments.est_4c_se) + "," +
           num(r.moments.blowup_fraction) + "\n";
  }
  return out;
}

std::string stats_json(const EnsembleStats& stats, const SimConfig& cfg) {
  using nlohmann::ordered_json;
  auto arr = [](const std::vector<double>& xs) {
    ordered_json a = ordered_json::array();
    for (double x : xs) a.push_back(std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr));
    return a;
  };
  auto num = [](double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); };
  ordered_json j;
  ordered_json c = ordered_json::object();
  for (const auto& [k, v] : config_entries(cfg)) c[k] = v;
  j["config"] = c;
  j["paths"] = stats.paths;
  j["blowup_fraction"] = stats.blowup_fraction;
  j["times"] = arr(stats.times);
  ordered_json series = ordered_json::object();
  for (const char* name : kSeriesNames) {
    const SeriesStats& s = stats.series.at(name);
    series[name] = {{"mean", arr(s.mean)}, {"var", arr(s.var)}, {"se", arr(s.se)}};
  }
  j["series"] = series;
  if (stats.moments) {
    const MomentEstimates& m = *stats.moments;
    j["moments"] = {{"paths", m.paths},
                    {"est_4a", num(m.est_4a)},
                    {"est_4a_se", num(m.est_4a_se)},
                    {"est_4c", num(m.est_4c)},
                    {"est_4c_se", num(m.est_4c_se)},
                    {"blowup_fraction", m.blowup_fraction}};
  } else {
    j["moments"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace skdv
