// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file theory.hpp
 * @brief Analytic predictors overlaid on the exact dynamics.
 *
 * The central relation: occupations relax as
 *
 *   n_alpha(t) = n_alpha(0) W_0(t) + n_alpha(inf) (1 - W_0(t)),
 *
 * i.e. whatever has left the initial state is already thermalized.
 */

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tbri/dynamics.hpp"
#include "tbri/hamiltonian.hpp"
#include "tbri/spectral.hpp"
#include "tbri/strength.hpp"

namespace tbri {

enum class SurvivalSource {
  Exact,        ///< numerically exact W_0(t)
  BreitWigner,  ///< exp(-Gamma t)
  Gaussian,     ///< exp(-Delta_E^2 t^2)
};

std::string_view to_string(SurvivalSource source);

struct ThermalizationPrediction {
  TimeGrid grid;
  Eigen::MatrixXd occupations;  ///< m x T
  SurvivalSource source = SurvivalSource::Exact;
};

/// Throws PreconditionError on length mismatches or W_0 outside [0, 1].
ThermalizationPrediction predict_occupations(std::span<const double> initial,
                                             std::span<const double> asymptotic,
                                             std::span<const double> survival,
                                             const TimeGrid& grid,
                                             SurvivalSource source = SurvivalSource::Exact);

struct SurvivalModels {
  std::vector<double> breit_wigner;          ///< exp(-Gamma t)
  std::vector<double> gaussian;              ///< exp(-Delta_E^2 t^2)
  double saturation = 0.0;                   ///< 3 / N_pc
  std::vector<double> breit_wigner_floored;  ///< max(exp(-Gamma t), 3 / N_pc)
  std::vector<double> gaussian_floored;
};

SurvivalModels survival_models(double gamma, double delta_e, double n_pc, const TimeGrid& grid);

struct PredictionError {
  double rms = 0.0;
  double max = 0.0;
};

/// Over all (alpha, t). Shapes must match.
PredictionError prediction_error(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& predicted);

/// F~ = integral of F(E_a, E) F(E_b, E) rho(E) dE with F rho replaced by the
/// profile smoothed with the density kernel of `rho`. Trapezoidal rule on a
/// uniform mesh of max(200, 4 per bandwidth) nodes; throws NumericalError if
/// halving the mesh changes the result by more than 1e-3 relative.
double convolve_profiles(const StrengthProfile& a, const StrengthProfile& b,
                         const SpectralStats& rho);

/// F~(E_i, E_q) with the q-profile taken from `decomp`.
double convolve_strength(const StrengthProfile& profile_i, const EigenDecomposition& decomp,
                         const SpectralStats& rho, std::size_t q);

/// F~(E_i, E_q) for every basis state q.
std::vector<double> convolve_strength_all(const StrengthProfile& profile_i,
                                          const EigenDecomposition& decomp,
                                          const SpectralStats& rho);

double fermi_dirac(double energy, double temperature, double chemical_potential);

struct FermiDiracFit {
  double temperature = 0.0;         ///< +inf when infinite_temperature
  double chemical_potential = 0.0;  ///< NaN when infinite_temperature
  double residual = 0.0;            ///< RMS deviation from the fitted occupations
  bool infinite_temperature = false;
};

/// Constrained least squares: for each trial temperature the chemical
/// potential is fixed by sum_alpha n_FD(eps_alpha) = n, and the RMS
/// deviation from `occupations` is minimized over 1/T >= 0. An optimum at
/// 1/T = 0 (or uniform occupations n/m) is reported as infinite temperature.
FermiDiracFit fit_fermi_dirac(std::span<const double> occupations,
                              const SingleParticleSpectrum& spectrum, int n);

/// Chemical potential giving sum_alpha n_FD = n at the given temperature.
double fermi_level(const SingleParticleSpectrum& spectrum, int n, double temperature);

}  // namespace tbri
