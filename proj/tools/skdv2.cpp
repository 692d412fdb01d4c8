// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

// skdv2: simulate, ensemble, sweep and verify commands.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skdv/config.hpp"
#include "skdv/ensemble.hpp"
#include "skdv/errors.hpp"
#include "skdv/integrator.hpp"
#include "skdv/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::size_t> paths;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
};

skdv::SimConfig resolve(const Common& c) {
  skdv::SimConfig cfg = c.config_path.empty() ? skdv::SimConfig{} : skdv::load_config(c.config_path);
  if (const char* env = std::getenv("SKDV2_SEED"); env != nullptr && *env != '\0') {
    skdv::apply_setting(cfg, "seed", env);
  }
  for (const std::string& o : c.overrides) skdv::apply_override(cfg, o);
  if (c.paths) cfg.paths = *c.paths;
  if (c.out) cfg.output_dir = *c.out;
  if (c.workers) cfg.workers = *c.workers;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

fs::path prepare_output(const skdv::SimConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_text(dir / "config.resolved", skdv::serialize_config(cfg));
  return dir;
}

std::string config_echo_comment(const skdv::SimConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : skdv::config_entries(cfg)) out += "# " + k + " = " + v + "\n";
  return out;
}

int simulate(const skdv::SimConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const skdv::NoiseModel noise = cfg.noise_model();
  const skdv::WeightFunction weight = cfg.weight();
  skdv::PathContext ctx;
  ctx.weight = weight.profile();
  ctx.window_k = cfg.window_k;
  ctx.lambda = cfg.lambda;
  ctx.w1 = skdv::certify_w1(noise, skdv::default_w1_trials(noise, cfg.lambda));
  ctx.keep_final_field = true;

  const skdv::Field u0 = cfg.initial_field();
  skdv::DriftSpec drift = cfg.drift;
  skdv::Stepper stepper(drift, noise, cfg.stepper, skdv::kBlowupFactor * cfg.lambda);
  skdv::Recorder recorder(ctx.weight, noise, drift, cfg.window_k);
  skdv::PathState state{0.0, u0, skdv::RngStream(cfg.seed, 0), 0};

  std::ofstream jsonl(dir / "diagnostics.jsonl", std::ios::binary);
  std::vector<skdv::DiagnosticsRecord> records;
  auto emit = [&](const skdv::DiagnosticsRecord& r) {
    records.push_back(r);
    jsonl << skdv::to_json_line(r) << '\n';
  };
  // The first line echoes the resolved config.
  {
    nlohmann::ordered_json echo;
    for (const auto& [k, v] : skdv::config_entries(cfg)) echo[k] = v;
    jsonl << nlohmann::ordered_json{{"config", echo}}.dump() << '\n';
  }
  std::size_t snapshot = 0;
  auto snap = [&](const skdv::Field& u, double t) {
    skdv::write_snapshot_file((dir / ("snapshot_" + std::to_string(snapshot++) + ".bin")).string(), u, t);
  };
  emit(recorder.record(0.0, state.u));
  snap(state.u, 0.0);
  const std::uint64_t total = cfg.stepper.step_count();
  bool blew_up = false;
  try {
    for (std::uint64_t n = 0; n < total; ++n) {
      stepper.advance(state);
      if (noise.kind() != skdv::NoiseKind::zero) skdv::assert_w1(noise, *ctx.w1, state.u);
      if (state.step % cfg.stepper.snapshot_every == 0 || state.step == total) {
        emit(recorder.record(state.t, state.u));
        snap(state.u, state.t);
      }
    }
  } catch (const skdv::BlowUpError& e) {
    blew_up = true;
    skdv::DiagnosticsRecord r;
    r.t = state.t;
    r.blow_up = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.l2_sq = r.h1_sq = r.h2_sq = r.h1_window_sq = r.f_value = nan;
    r.ito_drift_term = r.ito_trace_term = r.boundary_contamination = nan;
    emit(r);
    std::cerr << "blow-up: " << e.what() << '\n';
  }

  const std::pair<const char*, double skdv::DiagnosticsRecord::*> columns[] = {
      {"l2", &skdv::DiagnosticsRecord::l2_sq},       {"h1", &skdv::DiagnosticsRecord::h1_sq},
      {"h2", &skdv::DiagnosticsRecord::h2_sq},       {"h1_win", &skdv::DiagnosticsRecord::h1_window_sq},
      {"F", &skdv::DiagnosticsRecord::f_value},      {"ito_drift", &skdv::DiagnosticsRecord::ito_drift_term},
      {"ito_trace", &skdv::DiagnosticsRecord::ito_trace_term},
      {"bc", &skdv::DiagnosticsRecord::boundary_contamination}};
  for (const auto& [name, member] : columns) {
    std::string csv = config_echo_comment(cfg) + "t," + name + "\n";
    for (const auto& r : records) csv += skdv::format_double(r.t) + "," + skdv::format_double(r.*member) + "\n";
    write_text(dir / (std::string("plot_") + name + ".csv"), csv);
  }
  const double mass0 = skdv::integrate(u0);
  std::cout << "simulate: " << records.size() << " records, t_end " << skdv::format_double(state.t);
  if (!blew_up) std::cout << ", mass drift " << skdv::format_double(skdv::integrate(state.u) - mass0);
  std::cout << '\n';
  return blew_up ? kExitFailure : kExitOk;
}

skdv::EnsembleConfig ensemble_config(const skdv::SimConfig& cfg) {
  skdv::EnsembleConfig ec;
  ec.base = cfg;
  ec.paths = cfg.paths;
  ec.workers = cfg.workers;
  return ec;
}

int ensemble(const skdv::SimConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const skdv::EnsembleRun run = skdv::run_ensemble(ensemble_config(cfg));
  write_text(dir / "ensemble_stats.json", skdv::stats_json(run.stats, cfg));
  std::cout << "ensemble: " << run.stats.paths << " paths, blow-up fraction "
            << skdv::format_double(run.stats.blowup_fraction) << '\n';
  return kExitOk;
}

int sweep(const skdv::SimConfig& cfg, const std::vector<double>& epsilons) {
  const fs::path dir = prepare_output(cfg);
  const skdv::SweepTable table = skdv::sweep_epsilon(ensemble_config(cfg), epsilons);
  write_text(dir / "sweep.csv", skdv::sweep_csv(table));
  std::string dist = config_echo_comment(cfg) + "epsilon,distance_to_previous\n";
  for (const auto& r : table.rows) {
    dist += skdv::format_double(r.epsilon) + "," + skdv::format_double(r.distance_to_previous) + "\n";
  }
  write_text(dir / "sweep_distance.csv", dist);
  std::cout << skdv::sweep_csv(table);
  if (!table.common_draws) {
    std::cerr << "sweep: draw hashes differ across sweep points\n";
    return kExitFailure;
  }
  return kExitOk;
}

int verify(const skdv::SimConfig& cfg, const std::string& suite) {
  const skdv::VerifyReport rep = skdv::run_verify(suite, cfg);
  const std::string json = rep.to_json();
  std::cout << json;
  fs::create_directories(cfg.output_dir);
  write_text(fs::path(cfg.output_dir) / ("verify_" + suite + ".json"), json);
  if (const skdv::CheckResult* f = rep.first_failure()) {
    std::cerr << "verify: FAILED " << f->name << " measured " << skdv::format_double(f->measured) << " tolerance "
              << skdv::format_double(f->tolerance) << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Config file (key = value lines)");
  cmd->add_option("--override", c.overrides, "key=value, repeatable")->take_all();
  cmd->add_option("--paths", c.paths, "Number of Monte Carlo paths");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--workers", c.workers, "Worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic extended KdV simulator"};
  app.require_subcommand(1);
  Common common;
  std::string suite;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};

  auto* sim = app.add_subcommand("simulate", "Run one path and write diagnostics");
  add_common(sim, common);
  auto* ens = app.add_subcommand("ensemble", "Run a Monte Carlo ensemble");
  add_common(ens, common);
  auto* swp = app.add_subcommand("sweep", "Epsilon sweep with common random numbers");
  add_common(swp, common);
  swp->add_option("--epsilons", epsilons, "Decreasing list of epsilon values");
  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  add_common(ver, common);
  ver->add_option("suite", suite, "identities | noise_w1 | martingale | ito_budget | moments | all")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (ver->parsed()) {
      const auto& names = skdv::verify_suites();
      if (std::find(names.begin(), names.end(), suite) == names.end()) {
        std::cerr << "error: unknown verify suite '" << suite << "'\n";
        return kExitConfig;
      }
    }
    const skdv::SimConfig cfg = resolve(common);
    if (sim->parsed()) return simulate(cfg);
    if (ens->parsed()) return ensemble(cfg);
    if (swp->parsed()) return sweep(cfg, epsilons);
    return verify(cfg, suite);
  } catch (const skdv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const skdv::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const skdv::InvariantError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
