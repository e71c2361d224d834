// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <vector>

#include "tbri/hamiltonian.hpp"

namespace tbri {

/// Energies ascending; column k of `vectors` holds C_f^(k). Each column is
/// gauge-fixed so that its largest-magnitude component is positive.
struct EigenDecomposition {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;

  std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
};

/// Dense symmetric eigensolver. Throws NumericalError (carrying the residual)
/// when the solver fails or orthonormality/reconstruction checks miss
/// 1e-10 and 1e-8 * max|H| respectively.
EigenDecomposition diagonalize(const Eigen::MatrixXd& h);
EigenDecomposition diagonalize(const HamiltonianMatrix& h);

struct DecompositionChecks {
  double orthonormality = 0.0;  ///< max |C^T C - I|
  double residual = 0.0;        ///< max |H C - C diag(E)|
};
DecompositionChecks check_decomposition(const Eigen::MatrixXd& h, const EigenDecomposition& d);

/// Smoothed level density rho(E): a unit Gaussian of width `bandwidth` on
/// every eigenvalue, so the integral of rho equals N exactly.
class SpectralStats {
 public:
  SpectralStats(Eigen::VectorXd energies, double bandwidth, double mean_spacing_mid,
                double median_energy);

  double density(double energy) const;
  double operator()(double energy) const { return density(energy); }

  double bandwidth() const noexcept { return bandwidth_; }
  /// Mean level spacing D around the median energy.
  double mean_spacing_mid() const noexcept { return mean_spacing_mid_; }
  double median_energy() const noexcept { return median_energy_; }
  const Eigen::VectorXd& energies() const noexcept { return energies_; }

 private:
  Eigen::VectorXd energies_;
  double bandwidth_;
  double mean_spacing_mid_;
  double median_energy_;
};

/// `window` is the half-width around the median energy used for D. The
/// density bandwidth is `bandwidth_spacings` global mean spacings.
/// Throws PreconditionError for N < 3 and InsufficientStatistics if the
/// window holds fewer than 10 levels.
SpectralStats spectral_stats(const EigenDecomposition& decomp, double window,
                             double bandwidth_spacings = 3.0);

// Binary persistence: magic "TBRIEIG1", uint64 N, int32 n, int32 m, uint64 seed,
// double eta, double d0, double jitter, then N energies and N*N vector entries
// column-major, all as native doubles.
void write_decomposition(const std::filesystem::path& path, const EigenDecomposition& decomp,
                         const ModelParams& params);

struct DecompositionDump {
  ModelParams params;
  EigenDecomposition decomp;
};
DecompositionDump read_decomposition(const std::filesystem::path& path);

}  // namespace tbri
