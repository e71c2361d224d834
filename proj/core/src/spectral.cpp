// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "tbri/errors.hpp"

namespace tbri {

namespace {

constexpr char kDecompositionMagic[8] = {'T', 'B', 'R', 'I', 'E', 'I', 'G', '1'};
constexpr double kOrthonormalityTol = 1e-10;
constexpr double kResidualTol = 1e-8;

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void fix_gauge(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index pivot = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&pivot);
    if (vectors(pivot, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

}  // namespace

DecompositionChecks check_decomposition(const Eigen::MatrixXd& h, const EigenDecomposition& d) {
  const auto n = h.rows();
  DecompositionChecks checks;
  checks.orthonormality =
      (d.vectors.transpose() * d.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  checks.residual =
      (h * d.vectors - d.vectors * d.energies.asDiagonal()).cwiseAbs().maxCoeff();
  return checks;
}

EigenDecomposition diagonalize(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw PreconditionError("diagonalize: matrix must be square and non-empty");
  }
  if (!h.allFinite()) throw PreconditionError("diagonalize: non-finite matrix entries");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw PreconditionError("diagonalize: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("diagonalize: eigensolver did not converge",
                         std::numeric_limits<double>::infinity());
  }

  EigenDecomposition d{solver.eigenvalues(), solver.eigenvectors()};
  fix_gauge(d.vectors);

  const DecompositionChecks checks = check_decomposition(h, d);
  const double scale = std::max(h.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (checks.orthonormality > kOrthonormalityTol) {
    throw NumericalError("diagonalize: eigenvectors not orthonormal", checks.orthonormality);
  }
  if (checks.residual > kResidualTol * scale) {
    throw NumericalError("diagonalize: reconstruction residual too large", checks.residual);
  }
  return d;
}

EigenDecomposition diagonalize(const HamiltonianMatrix& h) { return diagonalize(h.entries()); }

SpectralStats::SpectralStats(Eigen::VectorXd energies, double bandwidth, double mean_spacing_mid,
                             double median_energy)
    : energies_(std::move(energies)),
      bandwidth_(bandwidth),
      mean_spacing_mid_(mean_spacing_mid),
      median_energy_(median_energy) {
  if (!(bandwidth_ > 0.0)) throw ParameterError("density bandwidth must be positive");
}

double SpectralStats::density(double energy) const {
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth_);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < energies_.size(); ++k) {
    const double z = (energy - energies_[k]) / bandwidth_;
    if (std::abs(z) < 40.0) sum += std::exp(-0.5 * z * z);
  }
  return norm * sum;
}

SpectralStats spectral_stats(const EigenDecomposition& decomp, double window,
                             double bandwidth_spacings) {
  const auto n = decomp.energies.size();
  if (n < 3) throw PreconditionError("spectral_stats: need at least 3 levels");
  if (!(window > 0.0)) throw ParameterError("spectral_stats: window must be positive");

  const Eigen::VectorXd& e = decomp.energies;
  const double median = (n % 2 == 1) ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);

  const double* begin = e.data();
  const double* end = e.data() + n;
  const double* lo = std::lower_bound(begin, end, median - window);
  const double* hi = std::upper_bound(begin, end, median + window);
  const auto inside = hi - lo;
  if (inside < 10) {
    throw InsufficientStatistics("spectral_stats: only " + std::to_string(inside) +
                                 " levels inside the window",
                                 static_cast<double>(inside));
  }
  const double spacing_mid = (*(hi - 1) - *lo) / static_cast<double>(inside - 1);

  const double global_spacing = (e[n - 1] - e[0]) / static_cast<double>(n - 1);
  double bandwidth = bandwidth_spacings * global_spacing;
  if (!(bandwidth > 0.0)) bandwidth = bandwidth_spacings * std::max(spacing_mid, 1e-12);
  return SpectralStats(e, bandwidth, spacing_mid, median);
}

void write_decomposition(const std::filesystem::path& path, const EigenDecomposition& decomp,
                         const ModelParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kDecompositionMagic, sizeof(kDecompositionMagic));
  put<std::uint64_t>(out, decomp.size());
  put<std::int32_t>(out, params.n);
  put<std::int32_t>(out, params.m);
  put<std::uint64_t>(out, params.seed);
  put<double>(out, params.eta);
  put<double>(out, params.d0);
  put<double>(out, params.jitter);
  out.write(reinterpret_cast<const char*>(decomp.energies.data()),
            static_cast<std::streamsize>(decomp.energies.size() * sizeof(double)));
  // Eigen's default storage is column-major.
  out.write(reinterpret_cast<const char*>(decomp.vectors.data()),
            static_cast<std::streamsize>(decomp.vectors.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

DecompositionDump read_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[sizeof(kDecompositionMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDecompositionMagic, sizeof(magic)) != 0) {
    throw IoError(path.string() + " is not a decomposition file");
  }
  DecompositionDump dump;
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  dump.params.n = get<std::int32_t>(in);
  dump.params.m = get<std::int32_t>(in);
  dump.params.seed = get<std::uint64_t>(in);
  dump.params.eta = get<double>(in);
  dump.params.d0 = get<double>(in);
  dump.params.jitter = get<double>(in);
  dump.decomp.energies.resize(n);
  dump.decomp.vectors.resize(n, n);
  in.read(reinterpret_cast<char*>(dump.decomp.energies.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(dump.decomp.vectors.data()),
          static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!in) throw IoError("truncated decomposition file " + path.string());
  return dump;
}

}  // namespace tbri
