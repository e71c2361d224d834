// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file hamiltonian.hpp
 * @brief Two-body random interaction (TBRI) model and its dense many-body matrix.
 *
 * H = sum_s eps_s a+_s a_s + sum_{p<q, r<s} V_{pq,rs} a+_p a+_q a_s a_r
 *
 * The single-particle levels are equidistant with spacing d0 (optionally
 * jittered); V_{pq,rs} = V_{rs,pq} are independent real Gaussians of variance
 * eta * d0^2, so eta = <V^2 / d0^2>.
 */

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "tbri/fock_basis.hpp"

namespace tbri {

struct ModelParams {
  int n = 6;
  int m = 12;
  double d0 = 1.0;
  double eta = 0.0;
  std::uint64_t seed = 1;
  double jitter = 0.0;
  bool include_single_moves = true;    ///< one-orbital-difference elements
  bool include_diagonal_pairs = true;  ///< V_{ss',ss'} on the diagonal

  /// Throws ParameterError unless d0 > 0, eta >= 0, 0 <= jitter < 1, 0 < n <= m.
  void validate() const;
};

struct SingleParticleSpectrum {
  std::vector<double> epsilon;  ///< ascending

  int size() const noexcept { return static_cast<int>(epsilon.size()); }
  double mean_spacing() const;
};

/// eps_s = d0 * s + jitter * d0 * u_s with u_s uniform on [-1/2, 1/2].
SingleParticleSpectrum sample_spectrum(const ModelParams& params);

/// Canonical two-body amplitudes V_{pq,rs}, p<q and r<s, stored as the upper
/// triangle of the (pair x pair) matrix. Pair index of (p,q) is lexicographic.
class TwoBodyTensor {
 public:
  explicit TwoBodyTensor(int m);

  int orbitals() const noexcept { return m_; }
  std::size_t pair_count() const noexcept { return pairs_; }
  static std::size_t pair_index(int p, int q, int m);

  /// V_{pq,rs} for ascending pairs.
  double canonical(std::size_t pq, std::size_t rs) const;
  void set_canonical(std::size_t pq, std::size_t rs, double value);

  /// Antisymmetric extension: V_{qp,rs} = -V_{pq,rs}; zero if p == q or r == s.
  double operator()(int p, int q, int r, int s) const;

  /// Independent elements (upper triangle including the diagonal).
  std::span<const double> elements() const noexcept { return packed_; }

  TwoBodyTensor scaled(double factor) const;

 private:
  std::size_t packed_index(std::size_t a, std::size_t b) const;

  int m_;
  std::size_t pairs_;
  std::vector<double> packed_;
};

/// Gaussian TBRI draw of variance eta * d0^2 per independent element.
TwoBodyTensor sample_two_body(const ModelParams& params);

struct HamiltonianOptions {
  bool include_single_moves = true;
  bool include_diagonal_pairs = true;
};

class HamiltonianMatrix {
 public:
  HamiltonianMatrix(std::shared_ptr<const Basis> basis, Eigen::MatrixXd entries);

  const Basis& basis() const noexcept { return *basis_; }
  std::shared_ptr<const Basis> basis_handle() const noexcept { return basis_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t f, std::size_t g) const {
    return entries_(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(g));
  }
  /// Unperturbed energies H_ff.
  Eigen::VectorXd diagonal() const { return entries_.diagonal(); }

 private:
  std::shared_ptr<const Basis> basis_;
  Eigen::MatrixXd entries_;
};

/// Slater-Condon assembly of H. Throws ParameterError on mismatched m.
HamiltonianMatrix build_hamiltonian(std::shared_ptr<const Basis> basis,
                                    const SingleParticleSpectrum& spectrum,
                                    const TwoBodyTensor& tensor,
                                    HamiltonianOptions options = {});

/// Sample spectrum and tensor from `params` and assemble H on a fresh basis.
HamiltonianMatrix build_model(const ModelParams& params);

/// <g|H|f> for a single pair of states; zero beyond two moved orbitals.
double matrix_element(FockState f, FockState g, const SingleParticleSpectrum& spectrum,
                      const TwoBodyTensor& tensor, HamiltonianOptions options = {});

// Binary dump: magic "TBRIHAM1", int32 n, int32 m, uint64 seed, double eta,
// double d0, uint64 N, then N*N doubles row-major. Native (little-endian) byte order.
void write_hamiltonian(const std::filesystem::path& path, const HamiltonianMatrix& h,
                       const ModelParams& params);

struct HamiltonianDump {
  ModelParams params;
  Eigen::MatrixXd entries;
};
HamiltonianDump read_hamiltonian(const std::filesystem::path& path);

}  // namespace tbri
