// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skdv/config.hpp"
#include "skdv/diagnostics.hpp"
#include "skdv/noise.hpp"

namespace skdv {

struct SweepPoint {
  double epsilon;
  std::size_t m;
};

struct EnsembleConfig {
  SimConfig base;
  std::size_t paths = 1;
  std::vector<SweepPoint> sweep;
  /// Thread count for the OpenMP fan-out. Results do not depend on it.
  std::size_t workers = 1;
  std::vector<ProbePair> probes;
  /// Return every PathResult (needed by budget and martingale checks).
  bool keep_paths = false;
};

/// Mean, sample variance and standard error at each snapshot time.
/// SE is NaN where fewer than two paths contribute.
struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> se;
  std::vector<std::size_t> count;
};

struct EnsembleStats {
  std::size_t paths = 0;
  std::vector<double> times;
  /// Keyed by the JSON-lines field names: l2, h1, h2, h1_win, F, ito_drift, ito_trace, bc.
  std::map<std::string, SeriesStats> series;
  double blowup_fraction = 0.0;
  std::optional<MomentEstimates> moments;
};

struct EnsembleRun {
  EnsembleStats stats;
  W1Certificate w1;
  std::vector<PathResult> paths;  // populated when keep_paths
};

/// OpenMP fan-out over paths. Path i uses RngStream(seed, i); the reduction
/// runs sequentially in path order after the parallel region.
EnsembleRun run_ensemble(const EnsembleConfig& cfg);
/// Reference implementation: same result, single loop, no OpenMP.
EnsembleRun run_ensemble_serial(const EnsembleConfig& cfg);

/// Sequential reduction of per-path results (sorted by path index).
EnsembleStats aggregate(std::vector<PathResult>& paths, double epsilon);

struct SweepRow {
  double epsilon = 0.0;
  std::size_t m = 0;
  MomentEstimates moments;
  /// Mean over paths of |u^{eps_prev} - u^{eps}|_{L2(0,T;L2)} against the previous row (NaN for the first row).
  double distance_to_previous = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Every path drew bitwise-identical increments at every sweep point.
  bool common_draws = true;
};

/// Runs cfg.sweep with common random numbers (all points share each path's stream).
SweepTable run_sweep(const EnsembleConfig& cfg);
/// epsilons must be positive and decreasing; m is taken from the base config.
SweepTable sweep_epsilon(EnsembleConfig cfg, const std::vector<double>& epsilons);

/// Header: epsilon,m,est_4a,est_4a_se,est_4c,est_4c_se,blowup_frac
std::string sweep_csv(const SweepTable& table);

/// ensemble_stats.json contents, including the resolved config.
std::string stats_json(const EnsembleStats& stats, const SimConfig& cfg);

}  // namespace skdv
