// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

// Randomized invariants over small models. Each case prints its parameters on
// failure; rerun with the same case index to reproduce.

#include <cmath>
#include <memory>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "tbri/dynamics.hpp"
#include "tbri/spectral.hpp"
#include "tbri/strength.hpp"
#include "tbri/theory.hpp"

using namespace tbri;

namespace {

constexpr int kCases = 60;

HamiltonianMatrix assemble(const ModelParams& p) {
  const auto basis = std::make_shared<const Basis>(Basis::build(p.n, p.m));
  return build_hamiltonian(basis, sample_spectrum(p), sample_two_body(p),
                           {p.include_single_moves, p.include_diagonal_pairs});
}

}  // namespace

TEST_CASE("property: fermionic phase equals operator reordering") {
  for (int c = 0; c < 2000; ++c) {
    gen::Source s(static_cast<std::uint64_t>(c));
    const int m = s.integer(4, 40);
    const int n = s.integer(2, m - 2);
    // Random n-subset of m orbitals.
    FockState state;
    while (state.particle_count() < n) state.occupancy |= Bitmask{1} << s.integer(0, m - 1);
    const auto occ = oracle::orbitals_of(state.occupancy);
    const auto empty = [&] {
      std::vector<int> out;
      for (int k = 0; k < m; ++k) if (!state.occupied(k)) out.push_back(k);
      return out;
    }();
    if (occ.size() < 2 || empty.size() < 2) continue;
    // Annihilate two occupied orbitals; create into any two orbitals free afterwards
    // (possibly the same ones).
    int a0 = occ[static_cast<std::size_t>(s.integer(0, static_cast<int>(occ.size()) - 1))];
    int a1 = a0;
    while (a1 == a0) a1 = occ[static_cast<std::size_t>(s.integer(0, static_cast<int>(occ.size()) - 1))];
    if (a0 > a1) std::swap(a0, a1);
    std::vector<int> free = empty;
    free.push_back(a0);
    free.push_back(a1);
    int c0 = free[static_cast<std::size_t>(s.integer(0, static_cast<int>(free.size()) - 1))];
    int c1 = c0;
    while (c1 == c0) c1 = free[static_cast<std::size_t>(s.integer(0, static_cast<int>(free.size()) - 1))];
    if (c0 > c1) std::swap(c0, c1);
    const auto expected = oracle::apply_string(occ, {{true, c0}, {true, c1}, {false, a1}, {false, a0}});
    REQUIRE(expected.has_value());
    CAPTURE(c);
    CHECK(fermionic_phase(state, {a0, a1}, {c0, c1}) == expected->second);
  }
}

TEST_CASE("property: assembled H matches the first-quantized oracle") {
  for (int c = 0; c < kCases; ++c) {
    gen::Source s(static_cast<std::uint64_t>(c));
    ModelParams p = gen::model(s, 7);
    p.include_single_moves = p.include_diagonal_pairs = true;
    if (p.n > 3) p.n = 3;
    INFO(gen::describe(p));
    const HamiltonianMatrix h = assemble(p);
    const Eigen::MatrixXd expected =
        oracle::first_quantized_hamiltonian(p.n, p.m, sample_spectrum(p).epsilon, sample_two_body(p));
    CHECK((h.entries() - expected).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("property: H is symmetric and two-body sparse") {
  for (int c = 0; c < kCases; ++c) {
    gen::Source s(static_cast<std::uint64_t>(c));
    const ModelParams p = gen::model(s, 10);
    INFO(gen::describe(p));
    const HamiltonianMatrix h = assemble(p);
    CHECK(h.entries() == h.entries().transpose());
    const Basis& b = h.basis();
    bool sparse = true;
    for (std::size_t f = 0; f < h.size(); ++f) {
      for (std::size_t g = 0; g < h.size(); ++g) {
        if (orbitals_moved(b[f], b[g]) > 2 && h(f, g) != 0.0) sparse = false;
      }
    }
    CHECK(sparse);
  }
}

TEST_CASE("property: conservation, unitarity and the moment identity") {
  for (int c = 0; c < kCases; ++c) {
    gen::Source s(static_cast<std::uint64_t>(c));
    const ModelParams p = gen::model(s, 10);
    INFO(gen::describe(p));
    const HamiltonianMatrix h = assemble(p);
    const EigenDecomposition d = diagonalize(h);
    const std::size_t i = static_cast<std::size_t>(s.bits() % h.size());
    const ClassPartition part = classify(h.basis(), h.basis()[i]);

    std::vector<double> times{0.0};
    for (int k = 0; k < 12; ++k) times.push_back(times.back() + s.log_uniform(1e-3, 10.0) / p.d0);
    const TimeGrid grid(times);
    const auto frames = evolve_amplitudes(d, i, grid);
    const OccupationTrajectory traj = simulate(d, h.basis(), part, i, grid);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const auto col = static_cast<Eigen::Index>(t);
      CHECK(std::abs(frames[t].norm_squared() - 1.0) < 1e-10);
      CHECK(std::abs(traj.occupations.col(col).sum() - p.n) < 1e-10);
      CHECK(std::abs(traj.class_population.col(col).sum() - 1.0) < 1e-10);
      CHECK(traj.survival[t] <= 1.0 + 1e-12);
    }

    const StrengthProfile prof = strength_function(d, h, i);
    const double de = energy_variance(h, i);
    CHECK(std::abs(prof.first_moment() - h(i, i)) <= 1e-10 * std::max(1.0, std::abs(h(i, i))));
    CHECK(std::abs(prof.variance() - de * de) <= 1e-8 * std::max(de * de, 1e-12));

    const auto inf = asymptotic_occupations(d, i, h.basis());
    double total = 0.0;
    for (double x : inf) {
      CHECK(x >= -1e-12);
      CHECK(x <= 1.0 + 1e-12);
      total += x;
    }
    CHECK(std::abs(total - p.n) < 1e-10);
  }
}

TEST_CASE("property: relaxation formula endpoints") {
  for (int c = 0; c < kCases; ++c) {
    gen::Source s(static_cast<std::uint64_t>(c));
    const int m = s.integer(2, 20);
    std::vector<double> n0(static_cast<std::size_t>(m)), ninf(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      n0[static_cast<std::size_t>(a)] = s.integer(0, 1);
      ninf[static_cast<std::size_t>(a)] = s.uniform(0.0, 1.0);
    }
    const double w = s.uniform(0.0, 1.0);
    const TimeGrid grid({0.0, 1.0, 2.0});
    const ThermalizationPrediction pred = predict_occupations(n0, ninf, std::vector<double>{1.0, w, 0.0}, grid);
    for (int a = 0; a < m; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      CHECK(pred.occupations(a, 0) == n0[ua]);
      CHECK(pred.occupations(a, 2) == ninf[ua]);
      const double lo = std::min(n0[ua], ninf[ua]), hi = std::max(n0[ua], ninf[ua]);
      CHECK(pred.occupations(a, 1) >= lo - 1e-15);
      CHECK(pred.occupations(a, 1) <= hi + 1e-15);
    }
  }
}
