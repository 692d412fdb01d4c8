// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "skdv/ensemble.hpp"

namespace {

skdv::EnsembleConfig bench_config(std::size_t workers) {
  skdv::EnsembleConfig ec;
  ec.paths = 16;
  ec.base.stepper.t_end = 0.1;
  ec.workers = workers;
  return ec;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const skdv::EnsembleConfig ec = bench_config(1);
  for (auto _ : state) benchmark::DoNotOptimize(skdv::run_ensemble_serial(ec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ec.paths));
}

void BM_EnsembleOpenMP(benchmark::State& state) {
  const skdv::EnsembleConfig ec = bench_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(skdv::run_ensemble(ec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ec.paths));
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnsembleOpenMP)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
