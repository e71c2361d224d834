// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tbri/errors.hpp"

namespace tbri {

namespace {

void require_index(const EigenDecomposition& decomp, std::size_t i, const char* who) {
  if (i >= decomp.size()) {
    throw PreconditionError(std::string(who) + ": basis index " + std::to_string(i) +
                            " out of range");
  }
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!std::isfinite(points_[k]) || points_[k] < 0.0) {
      throw ParameterError("time grid points must be finite and non-negative");
    }
    if (k > 0 && !(points_[k] > points_[k - 1])) {
      throw ParameterError("time grid must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::linear(double t0, double t1, std::size_t count) {
  if (count == 0) return TimeGrid{};
  if (count == 1) return TimeGrid({t0});
  std::vector<double> pts(count);
  const double step = (t1 - t0) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) pts[k] = t0 + step * static_cast<double>(k);
  pts.back() = t1;
  return TimeGrid(std::move(pts));
}

TimeGrid TimeGrid::logarithmic(double t0, double t1, std::size_t count) {
  if (!(t0 > 0.0) || !(t1 > t0)) throw ParameterError("log grid needs 0 < t0 < t1");
  if (count == 0) return TimeGrid{};
  if (count == 1) return TimeGrid({t0});
  std::vector<double> pts(count);
  const double a = std::log(t0);
  const double step = (std::log(t1) - a) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) pts[k] = std::exp(a + step * static_cast<double>(k));
  pts.front() = t0;
  pts.back() = t1;
  return TimeGrid(std::move(pts));
}

TimeGrid TimeGrid::merge(const std::vector<TimeGrid>& grids) {
  std::vector<double> all;
  for (const TimeGrid& g : grids) all.insert(all.end(), g.points_.begin(), g.points_.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return TimeGrid(std::move(all));
}

TimeGrid TimeGrid::standard(double delta_e, double gamma, int max_class, double d0) {
  if (!(delta_e > 0.0) || !(gamma > 0.0)) {
    return merge({TimeGrid({0.0}), logarithmic(1e-2 / d0, 1e2 / d0, 400)});
  }
  const double t_min = 1e-2 / delta_e;
  const double t_max = std::max(10.0 * std::max(max_class, 1) / gamma, 10.0 * t_min);
  return merge({TimeGrid({0.0}), logarithmic(t_min, t_max, 300),
                linear(0.5 / gamma, 1.5 / gamma, 100)});
}

TimeGrid TimeGrid::long_time(double mean_spacing, std::size_t samples) {
  if (!(mean_spacing > 0.0)) throw ParameterError("long_time grid needs a positive spacing");
  const double step = std::numbers::pi / mean_spacing;
  std::vector<double> pts(samples);
  for (std::size_t k = 0; k < samples; ++k) pts[k] = step * static_cast<double>(k + 1);
  return TimeGrid(std::move(pts));
}

std::vector<AmplitudeFrame> evolve_amplitudes(const EigenDecomposition& decomp, std::size_t i,
                                              const TimeGrid& grid) {
  require_index(decomp, i, "evolve_amplitudes");
  const auto n = static_cast<Eigen::Index>(decomp.size());
  const auto count = static_cast<Eigen::Index>(grid.size());
  const Eigen::VectorXd overlap = decomp.vectors.row(static_cast<Eigen::Index>(i)).transpose();

  // Phi_kt = C_i^(k) exp(-i E_k t); A = C Phi split into real and imaginary parts.
  Eigen::MatrixXd phi_re(n, count);
  Eigen::MatrixXd phi_im(n, count);
  for (Eigen::Index t = 0; t < count; ++t) {
    const double time = grid[static_cast<std::size_t>(t)];
    for (Eigen::Index k = 0; k < n; ++k) {
      const double phase = decomp.energies[k] * time;
      phi_re(k, t) = overlap[k] * std::cos(phase);
      phi_im(k, t) = -overlap[k] * std::sin(phase);
    }
  }
  const Eigen::MatrixXd re = decomp.vectors * phi_re;
  const Eigen::MatrixXd im = decomp.vectors * phi_im;

  std::vector<AmplitudeFrame> frames(static_cast<std::size_t>(count));
  for (Eigen::Index t = 0; t < count; ++t) {
    AmplitudeFrame& frame = frames[static_cast<std::size_t>(t)];
    frame.t = grid[static_cast<std::size_t>(t)];
    frame.amplitudes.resize(n);
    frame.amplitudes.real() = re.col(t);
    frame.amplitudes.imag() = im.col(t);
  }
  return frames;
}

Eigen::MatrixXd populations(const std::vector<AmplitudeFrame>& frames) {
  if (frames.empty()) return {};
  const auto n = frames.front().amplitudes.size();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(frames.size()));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    out.col(static_cast<Eigen::Index>(t)) = frames[t].amplitudes.cwiseAbs2();
  }
  return out;
}

Eigen::MatrixXd occupation_numbers(const std::vector<AmplitudeFrame>& frames, const Basis& basis) {
  const Eigen::MatrixXd pops = populations(frames);
  Eigen::MatrixXd occ = Eigen::MatrixXd::Zero(basis.orbitals(), static_cast<Eigen::Index>(frames.size()));
  if (frames.empty()) return occ;
  if (pops.rows() != static_cast<Eigen::Index>(basis.size())) {
    throw PreconditionError("occupation_numbers: frame size differs from the basis");
  }
  for (std::size_t f = 0; f < basis.size(); ++f) {
    for (Bitmask bits = basis[f].occupancy; bits != 0; bits &= bits - 1) {
      occ.row(std::countr_zero(bits)) += pops.row(static_cast<Eigen::Index>(f));
    }
  }
  return occ;
}

Eigen::MatrixXd class_populations(const std::vector<AmplitudeFrame>& frames,
                                  const ClassPartition& partition) {
  const Eigen::MatrixXd pops = populations(frames);
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(partition.max_class + 1, static_cast<Eigen::Index>(frames.size()));
  if (frames.empty()) return out;
  if (pops.rows() != static_cast<Eigen::Index>(partition.class_of.size())) {
    throw PreconditionError("class_populations: frame size differs from the partition");
  }
  for (std::size_t f = 0; f < partition.class_of.size(); ++f) {
    out.row(partition.class_of[f]) += pops.row(static_cast<Eigen::Index>(f));
  }
  return out;
}

std::vector<double> survival_probability(const EigenDecomposition& decomp, std::size_t i,
                                         const TimeGrid& grid) {
  require_index(decomp, i, "survival_probability");
  const Eigen::VectorXd w =
      decomp.vectors.row(static_cast<Eigen::Index>(i)).transpose().array().square();
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid.points()) {
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double phase = decomp.energies[k] * t;
      re += w[k] * std::cos(phase);
      im -= w[k] * std::sin(phase);
    }
    out.push_back(re * re + im * im);
  }
  return out;
}

Eigen::VectorXd diagonal_weights(const EigenDecomposition& decomp, std::size_t i) {
  require_index(decomp, i, "diagonal_weights");
  const Eigen::VectorXd w =
      decomp.vectors.row(static_cast<Eigen::Index>(i)).transpose().array().square();
  return decomp.vectors.array().square().matrix() * w;
}

OccupationSplit split_occupation_terms(const EigenDecomposition& decomp, std::size_t i,
                                       std::size_t q, const TimeGrid& grid) {
  require_index(decomp, i, "split_occupation_terms");
  require_index(decomp, q, "split_occupation_terms");
  const auto ri = static_cast<Eigen::Index>(i);
  const auto rq = static_cast<Eigen::Index>(q);
  const Eigen::VectorXd product =
      (decomp.vectors.row(ri).array() * decomp.vectors.row(rq).array()).transpose();

  OccupationSplit split;
  split.diagonal = product.squaredNorm();
  split.fluctuating.reserve(grid.size());
  for (double t : grid.points()) {
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index k = 0; k < product.size(); ++k) {
      const double phase = decomp.energies[k] * t;
      re += product[k] * std::cos(phase);
      im -= product[k] * std::sin(phase);
    }
    split.fluctuating.push_back(re * re + im * im - split.diagonal);
  }
  return split;
}

std::vector<double> fluctuating_term_direct(const EigenDecomposition& decomp, std::size_t i,
                                            std::size_t q, const TimeGrid& grid) {
  require_index(decomp, i, "fluctuating_term_direct");
  require_index(decomp, q, "fluctuating_term_direct");
  const auto ri = static_cast<Eigen::Index>(i);
  const auto rq = static_cast<Eigen::Index>(q);
  const auto n = static_cast<Eigen::Index>(decomp.size());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid.points()) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double ak = decomp.vectors(ri, k) * decomp.vectors(rq, k);
      for (Eigen::Index p = 0; p < n; ++p) {
        if (p == k) continue;
        const double ap = decomp.vectors(ri, p) * decomp.vectors(rq, p);
        // Imaginary parts cancel between (k, p) and (p, k).
        sum += ak * ap * std::cos((decomp.energies[k] - decomp.energies[p]) * t);
      }
    }
    out.push_back(sum);
  }
  return out;
}

std::vector<double> asymptotic_occupations(const EigenDecomposition& decomp, std::size_t i,
                                           const Basis& basis) {
  const Eigen::VectorXd s_diag = diagonal_weights(decomp, i);
  std::vector<double> occ(static_cast<std::size_t>(basis.orbitals()), 0.0);
  for (std::size_t q = 0; q < basis.size(); ++q) {
    for (Bitmask bits = basis[q].occupancy; bits != 0; bits &= bits - 1) {
      occ[static_cast<std::size_t>(std::countr_zero(bits))] += s_diag[static_cast<Eigen::Index>(q)];
    }
  }
  return occ;
}

OccupationTrajectory simulate(const EigenDecomposition& decomp, const Basis& basis,
                              const ClassPartition& partition, std::size_t i,
                              const TimeGrid& grid) {
  if (partition.reference != basis[i]) {
    throw PreconditionError("simulate: partition reference differs from the initial state");
  }
  const std::vector<AmplitudeFrame> frames = evolve_amplitudes(decomp, i, grid);
  OccupationTrajectory traj;
  traj.grid = grid;
  traj.occupations = occupation_numbers(frames, basis);
  traj.class_population = class_populations(frames, partition);
  traj.survival = survival_probability(decomp, i, grid);
  return traj;
}

double fit_decay_prefactor(const TimeGrid& grid, const std::vector<double>& w0, double gamma,
                           double saturation) {
  if (!(gamma > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < grid.size() && k < w0.size(); ++k) {
    if (grid[k] > 1.0 / gamma && w0[k] > saturation && w0[k] < 0.5) {
      sum += std::log(w0[k]) + gamma * grid[k];
      ++used;
    }
  }
  if (used < 3) return std::numeric_limits<double>::quiet_NaN();
  return std::exp(sum / static_cast<double>(used));
}

}  // namespace tbri
