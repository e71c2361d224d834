// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file strength.hpp
 * @brief Strength function (F-function) of a basis state and its spreading
 *        parameters.
 *
 * For basis state |i>, the weights w_k = (C_i^(k))^2 placed at E^(k) form the
 * local density of states. Its first moment is H_ii and its variance is
 * Delta_E^2 = sum_{f != i} H_if^2. The width is estimated two ways: the
 * golden rule Gamma = 2 pi <H_if^2> rho_f over directly coupled states, and
 * least-squares fits of the Breit-Wigner and Gaussian-Lorentzian shapes
 *
 *   BW:     F rho = (Gamma / 2 pi) / ((E - E0)^2 + Gamma^2 / 4)
 *   hybrid: F rho = B exp[-(E - E_c)^2 / 2 sigma^2] / ((E - E_i)^2 + Gamma^2 / 4)
 *
 * to the binned profile.
 */

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "tbri/fock_basis.hpp"
#include "tbri/hamiltonian.hpp"
#include "tbri/spectral.hpp"

namespace tbri {

struct StrengthProfile {
  std::size_t initial = 0;         ///< basis index i
  double unperturbed_energy = 0.0; ///< E_i = H_ii
  Eigen::VectorXd energies;        ///< E^(k), ascending
  Eigen::VectorXd weights;         ///< w_k = (C_i^(k))^2, sum 1

  double first_moment() const;
  double variance() const;
  /// 1 / sum w_k^2.
  double inverse_participation() const;
};

StrengthProfile strength_function(const EigenDecomposition& decomp, const HamiltonianMatrix& h,
                                  std::size_t i);
/// E_i taken as the profile's first moment (identical to H_ii up to rounding).
StrengthProfile strength_function(const EigenDecomposition& decomp, std::size_t i);

/// Delta_E = sqrt(sum_{f != i} H_if^2).
double energy_variance(const HamiltonianMatrix& h, std::size_t i);

struct GoldenRule {
  double gamma = 0.0;
  double mean_square_coupling = 0.0;  ///< mean of H_if^2 over class 1
  double final_density = 0.0;         ///< rho_f at E_i
  double bandwidth = 0.0;             ///< kernel width used for rho_f
  std::size_t class1_count = 0;
  std::size_t states_in_window = 0;   ///< class-1 states within 3 bandwidths of E_i
};

/// rho_f is a Gaussian-kernel density of {H_ff : f in class 1} evaluated at
/// H_ii, bandwidth = `bandwidth_spacings` x mean class-1 spacing. Throws
/// InsufficientStatistics when fewer than 10 class-1 energies lie within three
/// bandwidths of H_ii.
GoldenRule golden_rule(const HamiltonianMatrix& h, const ClassPartition& partition, std::size_t i,
                       double bandwidth_spacings = 3.0);
double golden_rule_gamma(const HamiltonianMatrix& h, const ClassPartition& partition,
                         std::size_t i);

/// Profile averaged over consecutive groups of eigenstates. `values` are
/// weight per unit energy, i.e. samples of F(E_i, E) rho(E).
struct BinnedProfile {
  std::vector<double> centers;
  std::vector<double> widths;
  std::vector<double> values;
};

/// Bins of at least `min_levels` eigenstates covering the central `coverage`
/// fraction of the weight.
BinnedProfile bin_profile(const StrengthProfile& profile, std::size_t min_levels = 10,
                          double coverage = 0.99);

struct BreitWignerFit {
  double gamma = 0.0;
  double center = 0.0;
  double residual = 0.0;  ///< RMS of (model - binned values)
  int iterations = 0;
};

/// Requires inverse_participation() >= 5 (PreconditionError otherwise).
/// The width guess defaults to the interquartile range of the weights.
BreitWignerFit fit_bw(const StrengthProfile& profile, std::optional<double> gamma_guess = {});

double breit_wigner(double energy, double center, double gamma);

struct HybridFit {
  double b_fitted = 0.0;
  double b_derived = 0.0;  ///< from the unit-normalization integral
  double band_center = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double residual = 0.0;
  double f_at_initial = 0.0;  ///< fitted F(E_i, E_i) = (F rho)(E_i) / rho(E_i)
  int iterations = 0;
};

struct HybridGuess {
  std::optional<double> gamma;        ///< defaults to the IQR width
  std::optional<double> sigma;        ///< defaults to sqrt(variance)
  std::optional<double> band_center;  ///< defaults to the first moment
};

HybridFit fit_hybrid(const StrengthProfile& profile, const SpectralStats& rho,
                     const HybridGuess& guess = {});

/// Shape of the hybrid form without B.
double hybrid_shape(double energy, double initial_energy, double band_center, double sigma,
                    double gamma);
/// 1 / integral of hybrid_shape over the real line.
double hybrid_normalization(double initial_energy, double band_center, double sigma,
                            double gamma);

/// n_alpha = sum_f (C_f^(k))^2 [alpha in f].
std::vector<double> compound_occupations(const EigenDecomposition& decomp, const Basis& basis,
                                         std::size_t k);

struct SpreadingParams {
  double gamma_gr = 0.0;
  double delta_e = 0.0;
  double sigma = 0.0;
  double band_center = 0.0;
  double n_pc_ratio = 0.0;  ///< Gamma / D with D = 1 / rho(E_i)
  double n_pc_ipr = 0.0;
  bool band_from_fit = false;  ///< sigma, E_c from fit_hybrid (else moments)
};

SpreadingParams spreading_params(const HamiltonianMatrix& h, const StrengthProfile& profile,
                                 const GoldenRule& golden, const SpectralStats& rho,
                                 const std::optional<HybridFit>& hybrid = {});

}  // namespace tbri
