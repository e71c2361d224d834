// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file dynamics.hpp
 * @brief Exact evolution of an initially excited basis state.
 *
 * Everything is evaluated spectrally (hbar = 1):
 *
 *   A_f(t) = sum_k C_i^(k) C_f^(k) exp(-i E^(k) t)
 *
 * so each time point is independent and exact; there is no time stepping.
 */

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

#include "tbri/fock_basis.hpp"
#include "tbri/spectral.hpp"

namespace tbri {

/// Ascending, non-negative times. May be empty.
class TimeGrid {
 public:
  TimeGrid() = default;
  /// Throws ParameterError unless points are finite, >= 0 and strictly increasing.
  explicit TimeGrid(std::vector<double> points);

  static TimeGrid linear(double t0, double t1, std::size_t count);
  static TimeGrid logarithmic(double t0, double t1, std::size_t count);
  /// Sorted union with exact duplicates removed.
  static TimeGrid merge(const std::vector<TimeGrid>& grids);

  /// t = 0, 300 log points over [1e-2 / delta_e, 10 n_c / gamma] and 100
  /// linear points over [0.5 / gamma, 1.5 / gamma]. Falls back to a log grid
  /// over [1e-2 / d0, 1e2 / d0] when gamma or delta_e vanishes.
  static TimeGrid standard(double delta_e, double gamma, int max_class, double d0 = 1.0);

  /// `samples` equidistant times spaced pi / mean_spacing, starting one
  /// spacing after t = 0; used for phase-averaged long-time limits.
  static TimeGrid long_time(double mean_spacing, std::size_t samples = 200);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double operator[](std::size_t k) const { return points_[k]; }

 private:
  std::vector<double> points_;
};

struct AmplitudeFrame {
  double t = 0.0;
  Eigen::VectorXcd amplitudes;  ///< A_f(t) over the basis

  double norm_squared() const { return amplitudes.squaredNorm(); }
};

std::vector<AmplitudeFrame> evolve_amplitudes(const EigenDecomposition& decomp, std::size_t i,
                                              const TimeGrid& grid);

/// |A_f(t)|^2 as an N x T matrix.
Eigen::MatrixXd populations(const std::vector<AmplitudeFrame>& frames);

/// n_alpha(t) = sum_f |A_f(t)|^2 [alpha in f], returned m x T.
Eigen::MatrixXd occupation_numbers(const std::vector<AmplitudeFrame>& frames, const Basis& basis);

/// W_s(t) = sum over class s of |A_f(t)|^2, returned (n_c + 1) x T.
Eigen::MatrixXd class_populations(const std::vector<AmplitudeFrame>& frames,
                                  const ClassPartition& partition);

/// W_0(t) = |sum_k (C_i^(k))^2 exp(-i E^(k) t)|^2.
std::vector<double> survival_probability(const EigenDecomposition& decomp, std::size_t i,
                                         const TimeGrid& grid);

/// S_q^(d) = sum_k (C_i^(k))^2 (C_q^(k))^2 for every q.
Eigen::VectorXd diagonal_weights(const EigenDecomposition& decomp, std::size_t i);

struct OccupationSplit {
  double diagonal = 0.0;            ///< S_q^(d)
  std::vector<double> fluctuating;  ///< S_q^(fl)(t) on the grid
};

/// S^(fl) is evaluated as |A_q(t)|^2 - S_q^(d), which equals the double sum
/// over k != p term by term.
OccupationSplit split_occupation_terms(const EigenDecomposition& decomp, std::size_t i,
                                       std::size_t q, const TimeGrid& grid);

/// Reference implementation of S_q^(fl)(t) as the explicit O(N^2) sum over
/// k != p; used to cross-check the fast path.
std::vector<double> fluctuating_term_direct(const EigenDecomposition& decomp, std::size_t i,
                                            std::size_t q, const TimeGrid& grid);

/// n_alpha(inf) = sum_q S_q^(d) [alpha in q] (diagonal ensemble).
std::vector<double> asymptotic_occupations(const EigenDecomposition& decomp, std::size_t i,
                                           const Basis& basis);

struct OccupationTrajectory {
  TimeGrid grid;
  Eigen::MatrixXd occupations;        ///< m x T
  std::vector<double> survival;       ///< W_0(t)
  Eigen::MatrixXd class_population;   ///< (n_c + 1) x T
};

/// Runs evolve_amplitudes once and derives all trajectory series.
OccupationTrajectory simulate(const EigenDecomposition& decomp, const Basis& basis,
                              const ClassPartition& partition, std::size_t i,
                              const TimeGrid& grid);

/// Fits W_0 = C exp(-Gamma t) over the window 1/Gamma < t with
/// saturation < W_0 < 0.5; returns C (NaN if fewer than 3 points qualify).
double fit_decay_prefactor(const TimeGrid& grid, const std::vector<double>& w0, double gamma,
                           double saturation);

}  // namespace tbri
