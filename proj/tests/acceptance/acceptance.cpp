// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Thresholds are fixed here and never tuned
// to the outcome.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tbri/dynamics.hpp"
#include "tbri/experiment.hpp"
#include "tbri/fock_basis.hpp"
#include "tbri/hamiltonian.hpp"
#include "tbri/spectral.hpp"
#include "tbri/strength.hpp"
#include "tbri/table.hpp"
#include "tbri/theory.hpp"

using namespace tbri;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kEtaWeak = 0.003;
constexpr double kEtaStrong = 0.083;
constexpr int kSeeds = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& check) {
  Outcome out;
  const auto start = Clock::now();
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, title,
              out.detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ModelParams preset(double eta, std::uint64_t seed) {
  ModelParams p;
  p.n = 6;
  p.m = 12;
  p.d0 = 1.0;
  p.eta = eta;
  p.seed = seed;
  return p;
}

/// One disorder realization with a mid-spectrum initial state.
struct Realization {
  HamiltonianMatrix h;
  EigenDecomposition d;
  std::size_t i;
  ClassPartition partition;
  GoldenRule golden;
  double delta_e;

  explicit Realization(const ModelParams& p)
      : h(build_model(p)),
        d(diagonalize(h)),
        i(select_initial_state(h, {})),
        partition(classify(h.basis(), h.basis()[i])),
        golden(golden_rule(h, partition, i)),
        delta_e(energy_variance(h, i)) {}
};

fs::path output_root() {
  const fs::path root = fs::current_path() / "acceptance-out";
  fs::create_directories(root);
  return root;
}

RunManifest run_preset(ExperimentConfig config, const std::string& dir) {
  config.output.directory = output_root() / dir;
  fs::remove_all(config.output.directory);
  return run(config);
}

Outcome spread_check(double eta, double g_lo, double g_hi, double d_lo, double d_hi) {
  std::vector<double> gammas, deltas;
  for (int s = 1; s <= kSeeds; ++s) {
    const Realization r(preset(eta, static_cast<std::uint64_t>(s)));
    gammas.push_back(r.golden.gamma);
    deltas.push_back(r.delta_e);
  }
  const double g = median(gammas), de = median(deltas);
  const bool pass = g >= g_lo && g <= g_hi && de >= d_lo && de <= d_hi;
  return {pass, fmt("median over %d seeds: Gamma = %.4g in [%g, %g], Delta_E = %.4g in [%g, %g]",
                    kSeeds, g, g_lo, g_hi, de, d_lo, d_hi)};
}

}  // namespace

int main() {
  std::printf("tbri acceptance (n = 6, m = 12, d0 = 1; seeds 1..%d where medians are taken)\n",
              kSeeds);

  report(1, "basis size", [] {
    const auto start = Clock::now();
    const Basis basis = Basis::build(6, 12);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return Outcome{basis.size() == 924 && ms < 1.0,
                   fmt("N = %zu (expected 924), built in %.3f ms (< 1 ms)", basis.size(), ms)};
  });

  report(2, "spectral evolution vs matrix exponential", [] {
    const auto start = Clock::now();
    double worst_amp = 0.0, worst_occ = 0.0, worst_w0 = 0.0;
    for (auto [n, m] : {std::pair{2, 4}, std::pair{3, 6}}) {
      ModelParams p = preset(0.2, 2024);
      p.n = n;
      p.m = m;
      const HamiltonianMatrix h = build_model(p);
      const EigenDecomposition d = diagonalize(h);
      std::mt19937_64 rng(7);
      std::uniform_real_distribution<double> dist(0.0, 20.0);
      std::vector<double> times(20);
      for (double& t : times) t = dist(rng);
      std::sort(times.begin(), times.end());
      const TimeGrid grid(times);
      for (std::size_t i = 0; i < h.size(); ++i) {
        const auto frames = evolve_amplitudes(d, i, grid);
        const Eigen::MatrixXd occ = occupation_numbers(frames, h.basis());
        const auto w0 = survival_probability(d, i, grid);
        for (std::size_t t = 0; t < grid.size(); ++t) {
          const Eigen::VectorXcd psi = oracle::propagate(h.entries(), i, grid[t]);
          worst_amp = std::max(worst_amp, (frames[t].amplitudes - psi).cwiseAbs().maxCoeff());
          worst_w0 = std::max(worst_w0, std::abs(w0[t] - std::norm(psi[static_cast<Eigen::Index>(i)])));
          for (int a = 0; a < m; ++a) {
            double expected = 0.0;
            for (std::size_t f = 0; f < h.size(); ++f) {
              if (h.basis()[f].occupied(a)) expected += std::norm(psi[static_cast<Eigen::Index>(f)]);
            }
            worst_occ = std::max(worst_occ, std::abs(occ(a, static_cast<Eigen::Index>(t)) - expected));
          }
        }
      }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const double worst = std::max({worst_amp, worst_occ, worst_w0});
    return Outcome{worst <= 1e-10 && secs < 1.0,
                   fmt("(2,4) and (3,6), all initial states, 20 random t: max |dA| = %.2e, "
                       "|dn| = %.2e, |dW0| = %.2e (<= 1e-10), %.3f s (< 1 s)",
                       worst_amp, worst_occ, worst_w0, secs)};
  });

  report(3, "strength-function variance = off-diagonal row weight", [] {
    double worst = 0.0;
    for (double eta : {kEtaWeak, kEtaStrong}) {
      const ModelParams p = preset(eta, 1);
      const HamiltonianMatrix h = build_model(p);
      const EigenDecomposition d = diagonalize(h);
      std::mt19937_64 rng(3);
      for (int r = 0; r < 10; ++r) {
        const std::size_t i = rng() % h.size();
        const StrengthProfile prof = strength_function(d, h, i);
        const double de = energy_variance(h, i);
        worst = std::max(worst, std::abs(prof.variance() - de * de) / (de * de));
      }
    }
    return Outcome{worst <= 1e-8, fmt("10 rows x 2 presets, max relative deviation %.2e (<= 1e-8)", worst)};
  });

  report(4, "weak regime (eta = 0.003) spreading", [] {
    return spread_check(kEtaWeak, 0.35, 0.65, 1.0, 1.35);
  });

  report(5, "strong regime (eta = 0.083) spreading", [] {
    return spread_check(kEtaStrong, 7.0, 14.0, 5.2, 6.4);
  });

  // The two preset runs feed criteria 6, 7, 9, 10, 11 and 12.
  const RunManifest weak = run_preset(ExperimentConfig::preset_fig1(), "fig1");
  const RunManifest strong = run_preset(ExperimentConfig::preset_fig2(), "fig2");

  report(6, "thermal plateau at eta = 0.083", [&] {
    double worst = 0.0;
    for (double x : strong.asymptotic_occupations) worst = std::max(worst, std::abs(x - 0.5));
    return Outcome{strong.asymptotic_occupations.size() == 12 && worst <= 0.05,
                   fmt("max_alpha |n_alpha(inf) - 0.5| = %.4f (<= 0.05), initial state %s",
                       worst, InitialStateRule{InitialStateRule::Kind::Explicit, strong.initial_state}
                                  .to_string().c_str())};
  });

  report(7, "relaxation formula with exact W0", [&] {
    const double rs = strong.eq14_exact_w0.rms, rw = weak.eq14_exact_w0.rms;
    return Outcome{rs <= 0.05 && rw <= 0.10,
                   fmt("RMS over (alpha, t): eta = 0.083 -> %.4f (<= 0.05; max %.4f), "
                       "eta = 0.003 -> %.4f (<= 0.10; max %.4f)",
                       rs, strong.eq14_exact_w0.max, rw, weak.eq14_exact_w0.max)};
  });

  report(8, "short-time quadratic decay", [] {
    double worst = 0.0;
    for (double eta : {kEtaWeak, kEtaStrong}) {
      const Realization r(preset(eta, 1));
      const TimeGrid grid = TimeGrid::logarithmic(1e-3 / r.delta_e, 0.1 / r.delta_e, 40);
      const auto w0 = survival_probability(r.d, r.i, grid);
      for (std::size_t t = 0; t < grid.size(); ++t) {
        const double x = r.delta_e * r.delta_e * grid[t] * grid[t];
        worst = std::max(worst, std::abs(w0[t] - (1.0 - x)) / x);
      }
    }
    return Outcome{worst <= 0.1,
                   fmt("max |W0 - (1 - Delta_E^2 t^2)| / (Delta_E^2 t^2) over Delta_E t <= 0.1 = "
                       "%.4f (<= 0.1)", worst)};
  });

  report(9, "long-time saturation of W0", [&] {
    const double ratio = strong.w0_long_time / strong.w0_saturation_model;
    return Outcome{ratio >= 0.5 && ratio <= 2.0,
                   fmt("<W0>_t = %.5f vs 3/N_pc = %.5f (N_pc = 1/IPR = %.1f): ratio %.3f "
                       "(needs [0.5, 2]); Gamma/D estimate N_pc = %.1f gives ratio %.3f",
                       strong.w0_long_time, strong.w0_saturation_model, strong.n_pc_ipr, ratio,
                       strong.n_pc_ratio, strong.w0_long_time / (3.0 / strong.n_pc_ratio))};
  });

  report(10, "conservation and unitarity", [] {
    double worst_n = 0.0, worst_w = 0.0, worst_u = 0.0;
    std::size_t points = 0;
    for (double eta : {kEtaWeak, kEtaStrong}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Realization r(preset(eta, seed));
        const TimeGrid grid = TimeGrid::standard(r.delta_e, r.golden.gamma, r.partition.max_class);
        const auto frames = evolve_amplitudes(r.d, r.i, grid);
        const Eigen::MatrixXd occ = occupation_numbers(frames, r.h.basis());
        const Eigen::MatrixXd cls = class_populations(frames, r.partition);
        for (std::size_t t = 0; t < grid.size(); ++t) {
          const auto c = static_cast<Eigen::Index>(t);
          worst_n = std::max(worst_n, std::abs(occ.col(c).sum() - 6.0));
          worst_w = std::max(worst_w, std::abs(cls.col(c).sum() - 1.0));
          worst_u = std::max(worst_u, std::abs(frames[t].norm_squared() - 1.0));
          ++points;
        }
      }
    }
    const double worst = std::max({worst_n, worst_w, worst_u});
    return Outcome{worst <= 1e-10,
                   fmt("%zu time points, 2 presets x 3 seeds: |sum n - 6| = %.1e, |sum W_s - 1| = "
                       "%.1e, |norm - 1| = %.1e (<= 1e-10)",
                       points, worst_n, worst_w, worst_u)};
  });

  report(11, "first-class population timescale at eta = 0.003", [&] {
    const double tau = 1.0 / weak.gamma_golden_rule;
    const double ratio = weak.w1_half_rise_time / tau;
    return Outcome{ratio >= 0.5 && ratio <= 2.0,
                   fmt("W1 half-max at t = %.4f, 1/Gamma = %.4f: ratio %.3f (needs [0.5, 2])",
                       weak.w1_half_rise_time, tau, ratio)};
  });

  report(12, "determinism of the strong-regime preset", [&] {
    const RunManifest again = run_preset(ExperimentConfig::preset_fig2(), "fig2-again");
    std::size_t compared = 0, differing = 0;
    for (const FileRecord& f : strong.files) {
      if (f.name.size() < 4 || f.name.substr(f.name.size() - 4) != ".csv") continue;
      ++compared;
      const std::string a = read_text(output_root() / "fig2" / f.name);
      const std::string b = read_text(output_root() / "fig2-again" / f.name);
      if (a != b) ++differing;
    }
    return Outcome{compared > 0 && differing == 0,
                   fmt("%zu CSV payloads compared byte for byte, %zu differ", compared, differing)};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
