// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "skdv/errors.hpp"

namespace skdv {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::gaussian_bump: return "gaussian_bump";
    case InitialKind::single_mode: return "single_mode";
    case InitialKind::sech_squared: return "sech_squared";
  }
  return "unknown";
}

InitialKind parse_initial_kind(const std::string& s) {
  if (s == "gaussian_bump") return InitialKind::gaussian_bump;
  if (s == "single_mode") return InitialKind::single_mode;
  if (s == "sech_squared") return InitialKind::sech_squared;
  throw ConfigError("initial_condition.kind must be gaussian_bump, single_mode or sech_squared, got '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    // Accept integral values written in floating notation such as 1e4.
    const double d = to_double(key, v);
    if (d < 0 || d != std::floor(d) || d > 1.8e19) {
      throw ConfigError("key '" + key + "': not a nonnegative integer: '" + v + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  return out;
}

}  // namespace

void apply_setting(SimConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "grid.n") c.grid_n = to_uint(key, v);
  else if (key == "grid.length") c.grid_length = to_double(key, v);
  else if (key == "drift.variant") c.drift.variant = parse_drift_variant(v);
  else if (key == "epsilon") c.drift.epsilon = to_double(key, v);
  else if (key == "galerkin_m") c.drift.m = to_uint(key, v);
  else if (key == "noise.kind") c.noise.kind = parse_noise_kind(v);
  else if (key == "noise.sigma0") c.noise.sigma0 = to_double(key, v);
  else if (key == "noise.decay_r") c.noise.decay_r = to_double(key, v);
  else if (key == "noise.modes") c.noise.modes = to_uint(key, v);
  else if (key == "noise.clip") c.noise.clip = to_double(key, v);
  else if (key == "weight.profile") c.weight_profile = v;
  else if (key == "weight.param") c.weight_param = to_double(key, v);
  else if (key == "lambda") c.lambda = to_double(key, v);
  else if (key == "dt") c.stepper.dt = to_double(key, v);
  else if (key == "t_end") c.stepper.t_end = to_double(key, v);
  else if (key == "scheme") c.stepper.scheme = parse_scheme(v);
  else if (key == "snapshot_every") c.stepper.snapshot_every = to_uint(key, v);
  else if (key == "initial_condition.kind") c.initial.kind = parse_initial_kind(v);
  else if (key == "initial_condition.amplitude") c.initial.amplitude = to_double(key, v);
  else if (key == "initial_condition.width") c.initial.width = to_double(key, v);
  else if (key == "initial_condition.center") c.initial.center = to_double(key, v);
  else if (key == "initial_condition.mode") c.initial.mode = to_uint(key, v);
  else if (key == "seed") c.seed = to_uint(key, v);
  else if (key == "window_k") c.window_k = to_double(key, v);
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "paths") c.paths = to_uint(key, v);
  else if (key == "workers") c.workers = to_uint(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(SimConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value, got '" + assignment + "'");
  apply_setting(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

SimConfig parse_config(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& c) {
  auto u = [](std::uint64_t v) { return std::to_string(v); };
  return {
      {"grid.n", u(c.grid_n)},
      {"grid.length", format_double(c.grid_length)},
      {"drift.variant", to_string(c.drift.variant)},
      {"epsilon", format_double(c.drift.epsilon)},
      {"galerkin_m", u(c.drift.m)},
      {"noise.kind", to_string(c.noise.kind)},
      {"noise.sigma0", format_double(c.noise.sigma0)},
      {"noise.decay_r", format_double(c.noise.decay_r)},
      {"noise.modes", u(c.noise.modes)},
      {"noise.clip", format_double(c.noise.clip)},
      {"weight.profile", c.weight_profile},
      {"weight.param", format_double(c.weight_param)},
      {"lambda", format_double(c.lambda)},
      {"dt", format_double(c.stepper.dt)},
      {"t_end", format_double(c.stepper.t_end)},
      {"scheme", to_string(c.stepper.scheme)},
      {"snapshot_every", u(c.stepper.snapshot_every)},
      {"initial_condition.kind", to_string(c.initial.kind)},
      {"initial_condition.amplitude", format_double(c.initial.amplitude)},
      {"initial_condition.width", format_double(c.initial.width)},
      {"initial_condition.center", format_double(c.initial.center)},
      {"initial_condition.mode", u(c.initial.mode)},
      {"seed", u(c.seed)},
      {"window_k", format_double(c.window_k)},
      {"output_dir", c.output_dir},
      {"paths", u(c.paths)},
      {"workers", u(c.workers)},
  };
}

std::string serialize_config(const SimConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

void SimConfig::validate() const {
  (void)grid();  // n power of two >= 8, L > 0
  drift.validate();
  if (drift.variant == DriftVariant::galerkin_cutoff && drift.m > grid_n / 2) {
    throw ConfigError("DriftSpec invariant violated: galerkin_m must not exceed n/2");
  }
  if (!(lambda > 2.0)) throw ConfigError("lambda must exceed 2");
  if (!(noise.clip <= lambda)) throw ConfigError("noise.clip must not exceed lambda");
  (void)noise_model();
  (void)weight();
  stepper.validate();
  if (!(window_k > 0.0) || window_k >= 0.5 * grid_length) throw ConfigError("window_k must satisfy 0 < k < L/2");
  if (initial.kind == InitialKind::single_mode && (initial.mode < 1 || initial.mode >= grid_n / 2)) {
    throw ConfigError("initial_condition.mode must be in 1..n/2-1");
  }
  if (initial.kind != InitialKind::single_mode && !(initial.width > 0.0)) {
    throw ConfigError("initial_condition.width must be positive");
  }
  if (paths < 1) throw ConfigError("EnsembleConfig invariant violated: paths must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

Field SimConfig::initial_field() const {
  const Grid g = grid();
  const InitialCondition ic = initial;
  Field u = [&] {
    switch (ic.kind) {
      case InitialKind::gaussian_bump:
        return Field::from_function(g, [ic](double x) {
          const double r = (x - ic.center) / ic.width;
          return ic.amplitude * std::exp(-0.5 * r * r);
        });
      case InitialKind::single_mode: {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(ic.mode) / g.length();
        return Field::from_function(g, [ic, w](double x) { return ic.amplitude * std::sin(w * x); });
      }
      case InitialKind::sech_squared:
        return Field::from_function(g, [ic](double x) {
          const double s = 1.0 / std::cosh((x - ic.center) / ic.width);
          return ic.amplitude * s * s;
        });
    }
    return Field(g);
  }();
  if (drift.variant == DriftVariant::galerkin_cutoff) u = project(u, drift.m);
  return u;
}

}  // namespace skdv
