// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "skdv/ensemble.hpp"
#include "skdv/errors.hpp"

namespace skdv {
namespace {

SimConfig small_config() {
  SimConfig c;
  c.grid_n = 64;
  c.grid_length = 40.0;
  c.drift = {DriftVariant::regularized, 0.1, 16};
  c.noise.modes = 8;
  c.stepper = {1e-3, 0.05, Scheme::imex_em, 10};
  c.seed = 2718;
  return c;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool stats_identical(const EnsembleStats& a, const EnsembleStats& b) {
  if (a.paths != b.paths || a.times != b.times || !same_bits(a.blowup_fraction, b.blowup_fraction)) return false;
  for (const auto& [name, s] : a.series) {
    const SeriesStats& t = b.series.at(name);
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
      if (!same_bits(s.mean[k], t.mean[k]) || !same_bits(s.var[k], t.var[k]) || !same_bits(s.se[k], t.se[k])) {
        return false;
      }
    }
  }
  if (a.moments.has_value() != b.moments.has_value()) return false;
  if (a.moments) {
    return same_bits(a.moments->est_4a, b.moments->est_4a) && same_bits(a.moments->est_4c, b.moments->est_4c) &&
           same_bits(a.moments->est_4a_se, b.moments->est_4a_se);
  }
  return true;
}

TEST(Ensemble, SinglePathStatsEqualRecords) {
  EnsembleConfig ec{small_config(), 1, {}, 1, {}, true};
  const EnsembleRun run = run_ensemble(ec);
  ASSERT_EQ(run.paths.size(), 1u);
  const auto& recs = run.paths[0].records;
  const SeriesStats& l2 = run.stats.series.at("l2");
  ASSERT_EQ(l2.mean.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(l2.mean[k], recs[k].l2_sq);
    EXPECT_TRUE(std::isnan(l2.se[k]));
  }
  const auto j = nlohmann::json::parse(stats_json(run.stats, ec.base));
  EXPECT_TRUE(j["series"]["l2"]["se"][0].is_null());
  EXPECT_TRUE(j["moments"]["est_4a_se"].is_null());
}

TEST(Ensemble, WorkerCountDoesNotChangeResults) {
  SimConfig c = small_config();
  c.noise.kind = NoiseKind::diagonal_multiplicative;
  EnsembleConfig one{c, 12, {}, 1, {}, true};
  EnsembleConfig eight{c, 12, {}, 8, {}, true};
  const EnsembleRun a = run_ensemble(one);
  const EnsembleRun b = run_ensemble(eight);
  const EnsembleRun s = run_ensemble_serial(one);
  EXPECT_TRUE(stats_identical(a.stats, b.stats));
  EXPECT_TRUE(stats_identical(a.stats, s.stats));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_TRUE(bitwise_equal(a.paths[i], b.paths[i])) << i;
  EXPECT_EQ(stats_json(a.stats, c), stats_json(b.stats, c));
}

TEST(Ensemble, ZeroDriftAdditiveItoIsometry) {
  SimConfig c = small_config();
  c.grid_n = 32;
  c.grid_length = 20.0;
  c.window_k = 5.0;
  c.drift = {DriftVariant::zero, 0.0, 8};
  c.noise.modes = 8;
  c.stepper = {0.01, 0.2, Scheme::imex_em, 5};
  EnsembleConfig ec{c, 10000, {}, 1, {}, false};
  const EnsembleRun run = run_ensemble(ec);
  const Field u0 = c.initial_field();
  const double l2_0 = inner(u0, u0);
  const double q2 = c.noise_model().weight_sum_sq();
  const SeriesStats& l2 = run.stats.series.at("l2");
  for (std::size_t k = 0; k < run.stats.times.size(); ++k) {
    const double expect = l2_0 + run.stats.times[k] * q2;
    EXPECT_LE(std::abs(l2.mean[k] - expect), 3 * l2.se[k] + 1e-12) << "t = " << run.stats.times[k];
  }
}

TEST(Ensemble, StandardErrorDefinition) {
  EnsembleConfig ec{small_config(), 6, {}, 1, {}, true};
  const EnsembleRun run = run_ensemble(ec);
  for (const auto& [name, s] : run.stats.series) {
    for (std::size_t k = 1; k < s.mean.size(); ++k) {
      EXPECT_NEAR(s.se[k], std::sqrt(s.var[k] / 6.0), 1e-15 * (1 + s.se[k])) << name;
    }
  }
  EXPECT_GE(run.stats.blowup_fraction, 0.0);
  EXPECT_LE(run.stats.blowup_fraction, 1.0);
}

TEST(Ensemble, ConfigErrorsBeforeAnyPath) {
  EnsembleConfig ec{small_config(), 0, {}, 1, {}, false};
  EXPECT_THROW(run_ensemble(ec), ConfigError);
  ec.paths = 2;
  ec.sweep = {{0.1, 8}, {-1.0, 8}};
  EXPECT_THROW(run_sweep(ec), ConfigError);
  ec.sweep.clear();
  ec.workers = 0;
  EXPECT_THROW(run_ensemble(ec), ConfigError);
}

TEST(Ensemble, BlowUpCountedNotFatal) {
  SimConfig c = small_config();
  c.lambda = 2.5;
  c.weight_profile = "const";
  c.weight_param = 1.0;
  c.noise.clip = 2.0;
  c.initial.amplitude = 24.0;  // above the 10 lambda blow-up threshold after one step
  c.initial.width = 4.0;
  EnsembleConfig ec{c, 3, {}, 1, {}, false};
  const EnsembleRun run = run_ensemble(ec);
  EXPECT_EQ(run.stats.blowup_fraction, 1.0);
  EXPECT_FALSE(run.stats.moments.has_value());
}

TEST(Sweep, SingleEpsilonMatchesEnsemble) {
  SimConfig c = small_config();
  EnsembleConfig ec{c, 4, {}, 1, {}, false};
  const SweepTable t = sweep_epsilon(ec, {0.1});
  ASSERT_EQ(t.rows.size(), 1u);
  const EnsembleRun run = run_ensemble(ec);
  EXPECT_EQ(t.rows[0].moments.est_4a, run.stats.moments->est_4a);
  EXPECT_EQ(t.rows[0].moments.est_4c, run.stats.moments->est_4c);
  EXPECT_EQ(t.rows[0].moments.est_4a_se, run.stats.moments->est_4a_se);
}

TEST(Sweep, DeterministicSelfConvergence) {
  SimConfig c = small_config();
  c.grid_n = 128;
  c.noise.kind = NoiseKind::zero;
  c.stepper = {1e-3, 0.5, Scheme::imex_em, 10};
  EnsembleConfig ec{c, 1, {}, 1, {}, false};
  const SweepTable t = sweep_epsilon(ec, {1e-1, 1e-2, 1e-3});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_TRUE(std::isnan(t.rows[0].distance_to_previous));
  EXPECT_GT(t.rows[1].distance_to_previous, 0.0);
  EXPECT_LT(t.rows[2].distance_to_previous, t.rows[1].distance_to_previous);
}

TEST(Sweep, CommonRandomNumbers) {
  SimConfig c = small_config();
  EnsembleConfig ec{c, 4, {}, 2, {}, false};
  const SweepTable t = sweep_epsilon(ec, {1e-1, 1e-2});
  EXPECT_TRUE(t.common_draws);
}

TEST(Sweep, RejectsBadEpsilonLists) {
  EnsembleConfig ec{small_config(), 2, {}, 1, {}, false};
  EXPECT_THROW(sweep_epsilon(ec, {}), ConfigError);
  EXPECT_THROW(sweep_epsilon(ec, {1e-2, 1e-1}), ConfigError);
  EXPECT_THROW(sweep_epsilon(ec, {0.1, 0.0}), ConfigError);
}

TEST(Sweep, CsvHeader) {
  EnsembleConfig ec{small_config(), 2, {}, 1, {}, false};
  const std::string csv = sweep_csv(sweep_epsilon(ec, {0.1, 0.05}));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epsilon,m,est_4a,est_4a_se,est_4c,est_4c_se,blowup_frac");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(StatsJson, EmbedsResolvedConfig) {
  SimConfig c = small_config();
  EnsembleConfig ec{c, 2, {}, 1, {}, false};
  const auto j = nlohmann::json::parse(stats_json(run_ensemble(ec).stats, c));
  EXPECT_EQ(j["config"]["seed"], "2718");
  EXPECT_EQ(j["config"]["dt"], "0.001");
  EXPECT_EQ(j["paths"], 2);
}

}  // namespace
}  // namespace skdv
