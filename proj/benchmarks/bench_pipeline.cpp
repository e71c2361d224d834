// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

// Pipeline stage timings at n = m/2, the half-filled case used throughout.

#include <benchmark/benchmark.h>

#include <memory>

#include "tbri/dynamics.hpp"
#include "tbri/fock_basis.hpp"
#include "tbri/hamiltonian.hpp"
#include "tbri/spectral.hpp"
#include "tbri/strength.hpp"

namespace {

tbri::ModelParams model(int m) {
  tbri::ModelParams p;
  p.n = m / 2;
  p.m = m;
  p.eta = 0.083;
  return p;
}

void BM_BasisBuild(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto basis = tbri::Basis::build(m / 2, m);
    benchmark::DoNotOptimize(basis.size());
  }
}
BENCHMARK(BM_BasisBuild)->Arg(8)->Arg(12)->Arg(16);

void BM_Assemble(benchmark::State& state) {
  const tbri::ModelParams p = model(static_cast<int>(state.range(0)));
  const auto basis = std::make_shared<const tbri::Basis>(tbri::Basis::build(p.n, p.m));
  const auto eps = tbri::sample_spectrum(p);
  const auto v = tbri::sample_two_body(p);
  for (auto _ : state) {
    auto h = tbri::build_hamiltonian(basis, eps, v);
    benchmark::DoNotOptimize(h.entries().data());
  }
  state.counters["N"] = static_cast<double>(basis->size());
}
BENCHMARK(BM_Assemble)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Diagonalize(benchmark::State& state) {
  const auto h = tbri::build_model(model(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    auto d = tbri::diagonalize(h);
    benchmark::DoNotOptimize(d.energies.data());
  }
  state.counters["N"] = static_cast<double>(h.size());
}
BENCHMARK(BM_Diagonalize)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Evolve(benchmark::State& state) {
  const tbri::ModelParams p = model(12);
  const auto h = tbri::build_model(p);
  const auto d = tbri::diagonalize(h);
  const auto grid = tbri::TimeGrid::linear(0.0, 5.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto frames = tbri::evolve_amplitudes(d, 0, grid);
    benchmark::DoNotOptimize(frames.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evolve)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Occupations(benchmark::State& state) {
  const tbri::ModelParams p = model(12);
  const auto h = tbri::build_model(p);
  const auto d = tbri::diagonalize(h);
  const auto frames = tbri::evolve_amplitudes(d, 0, tbri::TimeGrid::linear(0.0, 5.0, 400));
  for (auto _ : state) {
    auto n = tbri::occupation_numbers(frames, h.basis());
    benchmark::DoNotOptimize(n.data());
  }
}
BENCHMARK(BM_Occupations)->Unit(benchmark::kMillisecond);

void BM_GoldenRule(benchmark::State& state) {
  const auto h = tbri::build_model(model(12));
  const auto partition = tbri::classify(h.basis(), h.basis()[400]);
  for (auto _ : state) {
    auto g = tbri::golden_rule(h, partition, 400);
    benchmark::DoNotOptimize(g.gamma);
  }
}
BENCHMARK(BM_GoldenRule);

}  // namespace

BENCHMARK_MAIN();
