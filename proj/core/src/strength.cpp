// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/strength.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "tbri/errors.hpp"
#include "tbri/least_squares.hpp"

namespace tbri {

namespace {

constexpr double kMinComponents = 5.0;

void require_spread(const StrengthProfile& profile, const char* who) {
  const double ipr = profile.inverse_participation();
  if (!(ipr >= kMinComponents)) {
    throw PreconditionError(std::string(who) + ": profile has only " + std::to_string(ipr) +
                            " principal components (need >= 5)");
  }
}

/// Energy at which the cumulative weight first reaches `fraction`.
double weight_quantile(const StrengthProfile& p, double fraction) {
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < p.weights.size(); ++k) {
    cumulative += p.weights[k];
    if (cumulative >= fraction) return p.energies[k];
  }
  return p.energies[p.energies.size() - 1];
}

double width_guess(const StrengthProfile& p) {
  const double iqr = weight_quantile(p, 0.75) - weight_quantile(p, 0.25);
  if (iqr > 0.0) return iqr;
  return std::max(std::sqrt(p.variance()), 1e-6);
}

}  // namespace

double StrengthProfile::first_moment() const { return weights.dot(energies); }

double StrengthProfile::variance() const {
  const double mean = first_moment();
  return weights.dot((energies.array() - mean).square().matrix());
}

double StrengthProfile::inverse_participation() const { return 1.0 / weights.squaredNorm(); }

StrengthProfile strength_function(const EigenDecomposition& decomp, const HamiltonianMatrix& h,
                                  std::size_t i) {
  StrengthProfile profile = strength_function(decomp, i);
  profile.unperturbed_energy = h(i, i);
  return profile;
}

StrengthProfile strength_function(const EigenDecomposition& decomp, std::size_t i) {
  if (i >= decomp.size()) {
    throw PreconditionError("strength_function: basis index " + std::to_string(i) +
                            " out of range");
  }
  StrengthProfile profile;
  profile.initial = i;
  profile.energies = decomp.energies;
  profile.weights = decomp.vectors.row(static_cast<Eigen::Index>(i)).transpose().array().square();
  profile.weights /= profile.weights.sum();
  profile.unperturbed_energy = profile.first_moment();
  return profile;
}

double energy_variance(const HamiltonianMatrix& h, std::size_t i) {
  if (i >= h.size()) throw PreconditionError("energy_variance: row out of range");
  const auto row = static_cast<Eigen::Index>(i);
  const double diag = h.entries()(row, row);
  const double total = h.entries().col(row).squaredNorm() - diag * diag;
  return std::sqrt(std::max(total, 0.0));
}

GoldenRule golden_rule(const HamiltonianMatrix& h, const ClassPartition& partition, std::size_t i,
                       double bandwidth_spacings) {
  const Basis& basis = h.basis();
  if (i >= basis.size()) throw PreconditionError("golden_rule: row out of range");
  if (partition.reference != basis[i] || partition.class_of.size() != basis.size()) {
    throw PreconditionError("golden_rule: partition reference differs from the initial state");
  }

  const auto row = static_cast<Eigen::Index>(i);
  std::vector<double> energies;
  double coupling_sum = 0.0;
  for (std::size_t f = 0; f < basis.size(); ++f) {
    if (partition.class_of[f] != 1) continue;
    const auto col = static_cast<Eigen::Index>(f);
    const double v = h.entries()(col, row);
    coupling_sum += v * v;
    energies.push_back(h.entries()(col, col));
  }
  if (energies.empty()) throw PreconditionError("golden_rule: class 1 is empty");

  GoldenRule result;
  result.class1_count = energies.size();
  result.mean_square_coupling = coupling_sum / static_cast<double>(energies.size());

  const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
  const double spacing =
      energies.size() > 1 ? (*hi - *lo) / static_cast<double>(energies.size() - 1) : 0.0;
  result.bandwidth = bandwidth_spacings * spacing;

  const double e_i = h.entries()(row, row);
  for (double e : energies) {
    if (std::abs(e - e_i) <= 3.0 * result.bandwidth) ++result.states_in_window;
  }
  if (result.states_in_window < 10 || !(result.bandwidth > 0.0)) {
    throw InsufficientStatistics("golden_rule: " + std::to_string(result.states_in_window) +
                                     " class-1 states in the density window (need >= 10)",
                                 static_cast<double>(result.states_in_window));
  }

  double kernel = 0.0;
  for (double e : energies) {
    const double z = (e - e_i) / result.bandwidth;
    kernel += std::exp(-0.5 * z * z);
  }
  result.final_density = kernel / (std::sqrt(2.0 * std::numbers::pi) * result.bandwidth);
  result.gamma = 2.0 * std::numbers::pi * result.mean_square_coupling * result.final_density;
  return result;
}

double golden_rule_gamma(const HamiltonianMatrix& h, const ClassPartition& partition,
                         std::size_t i) {
  return golden_rule(h, partition, i).gamma;
}

BinnedProfile bin_profile(const StrengthProfile& profile, std::size_t min_levels,
                          double coverage) {
  const auto n = static_cast<std::size_t>(profile.energies.size());
  if (min_levels == 0) throw ParameterError("bin_profile: min_levels must be positive");
  if (n < min_levels) throw InsufficientStatistics("bin_profile: fewer levels than one bin");

  const double tail = 0.5 * (1.0 - coverage);
  std::size_t first = 0;
  std::size_t last = n - 1;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumulative += profile.weights[static_cast<Eigen::Index>(k)];
    if (cumulative >= tail) {
      first = k;
      break;
    }
  }
  cumulative = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    cumulative += profile.weights[static_cast<Eigen::Index>(k)];
    if (cumulative >= tail) {
      last = k;
      break;
    }
  }
  // Widen to at least one full bin.
  while (last - first + 1 < min_levels) {
    if (first > 0) --first;
    if (last - first + 1 < min_levels && last + 1 < n) ++last;
  }

  const auto e = [&](std::size_t k) { return profile.energies[static_cast<Eigen::Index>(k)]; };
  const auto lower_edge = [&](std::size_t k) {
    if (k > 0) return 0.5 * (e(k - 1) + e(k));
    return n > 1 ? e(0) - 0.5 * (e(1) - e(0)) : e(0) - 0.5;
  };
  const auto upper_edge = [&](std::size_t k) {
    if (k + 1 < n) return 0.5 * (e(k) + e(k + 1));
    return n > 1 ? e(n - 1) + 0.5 * (e(n - 1) - e(n - 2)) : e(0) + 0.5;
  };

  BinnedProfile bins;
  const std::size_t span = last - first + 1;
  const std::size_t count = span / min_levels;
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t begin = first + b * min_levels;
    const std::size_t end = (b + 1 == count) ? last + 1 : begin + min_levels;
    double weight = 0.0;
    for (std::size_t k = begin; k < end; ++k) weight += profile.weights[static_cast<Eigen::Index>(k)];
    const double lo = lower_edge(begin);
    const double hi = upper_edge(end - 1);
    const double width = hi - lo;
    if (!(width > 0.0)) continue;
    bins.centers.push_back(0.5 * (lo + hi));
    bins.widths.push_back(width);
    bins.values.push_back(weight / width);
  }
  return bins;
}

double breit_wigner(double energy, double center, double gamma) {
  const double d = energy - center;
  return gamma / (2.0 * std::numbers::pi) / (d * d + 0.25 * gamma * gamma);
}

BreitWignerFit fit_bw(const StrengthProfile& profile, std::optional<double> gamma_guess) {
  require_spread(profile, "fit_bw");
  const BinnedProfile bins = bin_profile(profile);
  const auto count = static_cast<Eigen::Index>(bins.values.size());
  if (count < 3) throw InsufficientStatistics("fit_bw: fewer than 3 bins");

  const ResidualFunction residuals = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(count);
    for (Eigen::Index b = 0; b < count; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      r[b] = breit_wigner(bins.centers[ub], x[1], std::abs(x[0])) - bins.values[ub];
    }
    return r;
  };

  Eigen::VectorXd x0(2);
  x0 << gamma_guess.value_or(width_guess(profile)), profile.first_moment();
  const LevenbergMarquardtResult lm = levenberg_marquardt(residuals, x0);
  const double rms = std::sqrt(2.0 * lm.cost / static_cast<double>(count));
  if (!lm.converged || !lm.parameters.allFinite()) {
    throw FitError("fit_bw: Levenberg-Marquardt did not converge after " +
                       std::to_string(lm.iterations) + " iterations",
                   {lm.parameters.data(), lm.parameters.data() + lm.parameters.size()}, rms);
  }
  return {std::abs(lm.parameters[0]), lm.parameters[1], rms, lm.iterations};
}

double hybrid_shape(double energy, double initial_energy, double band_center, double sigma,
                    double gamma) {
  const double g = (energy - band_center) / sigma;
  const double d = energy - initial_energy;
  return std::exp(-0.5 * g * g) / (d * d + 0.25 * gamma * gamma);
}

double hybrid_normalization(double initial_energy, double band_center, double sigma,
                            double gamma) {
  if (!(sigma > 0.0) || !(gamma > 0.0)) {
    throw ParameterError("hybrid_normalization: sigma and gamma must be positive");
  }
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto shape = [&](double e) {
    return hybrid_shape(e, initial_energy, band_center, sigma, gamma);
  };
  const double reach = std::abs(band_center - initial_energy) + 14.0 * sigma;
  std::vector<double> cuts{initial_energy - reach, initial_energy, band_center,
                           initial_energy + reach};
  std::sort(cuts.begin(), cuts.end());
  double integral = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    if (cuts[s + 1] > cuts[s]) integral += Quadrature::integrate(shape, cuts[s], cuts[s + 1], 20, 1e-12);
  }
  return 1.0 / integral;
}

HybridFit fit_hybrid(const StrengthProfile& profile, const SpectralStats& rho,
                     const HybridGuess& guess) {
  require_spread(profile, "fit_hybrid");
  const BinnedProfile bins = bin_profile(profile);
  const auto count = static_cast<Eigen::Index>(bins.values.size());
  if (count < 5) throw InsufficientStatistics("fit_hybrid: fewer than 5 bins");
  const double e_i = profile.unperturbed_energy;

  const ResidualFunction residuals = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(count);
    const double sigma = std::abs(x[2]);
    const double gamma = std::abs(x[3]);
    for (Eigen::Index b = 0; b < count; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      r[b] = x[0] * hybrid_shape(bins.centers[ub], e_i, x[1], sigma, gamma) - bins.values[ub];
    }
    return r;
  };

  const double gamma0 = guess.gamma.value_or(width_guess(profile));
  const double sigma0 = guess.sigma.value_or(std::sqrt(profile.variance()));
  const double center0 = guess.band_center.value_or(profile.first_moment());
  Eigen::VectorXd x0(4);
  x0 << hybrid_normalization(e_i, center0, sigma0, gamma0), center0, sigma0, gamma0;

  const LevenbergMarquardtResult lm = levenberg_marquardt(residuals, x0);
  const double rms = std::sqrt(2.0 * lm.cost / static_cast<double>(count));
  if (!lm.converged || !lm.parameters.allFinite()) {
    throw FitError("fit_hybrid: Levenberg-Marquardt did not converge after " +
                       std::to_string(lm.iterations) + " iterations",
                   {lm.parameters.data(), lm.parameters.data() + lm.parameters.size()}, rms);
  }

  HybridFit fit;
  fit.b_fitted = lm.parameters[0];
  fit.band_center = lm.parameters[1];
  fit.sigma = std::abs(lm.parameters[2]);
  fit.gamma = std::abs(lm.parameters[3]);
  fit.b_derived = hybrid_normalization(e_i, fit.band_center, fit.sigma, fit.gamma);
  fit.residual = rms;
  fit.iterations = lm.iterations;
  const double density = rho.density(e_i);
  if (density > 0.0) {
    fit.f_at_initial =
        fit.b_fitted * hybrid_shape(e_i, e_i, fit.band_center, fit.sigma, fit.gamma) / density;
  }
  return fit;
}

std::vector<double> compound_occupations(const EigenDecomposition& decomp, const Basis& basis,
                                         std::size_t k) {
  if (k >= decomp.size()) throw PreconditionError("compound_occupations: index out of range");
  std::vector<double> occupations(static_cast<std::size_t>(basis.orbitals()), 0.0);
  const auto col = static_cast<Eigen::Index>(k);
  for (std::size_t f = 0; f < basis.size(); ++f) {
    const double c = decomp.vectors(static_cast<Eigen::Index>(f), col);
    const double w = c * c;
    for (Bitmask occ = basis[f].occupancy; occ != 0; occ &= occ - 1) {
      occupations[static_cast<std::size_t>(std::countr_zero(occ))] += w;
    }
  }
  return occupations;
}

SpreadingParams spreading_params(const HamiltonianMatrix& h, const StrengthProfile& profile,
                                 const GoldenRule& golden, const SpectralStats& rho,
                                 const std::optional<HybridFit>& hybrid) {
  SpreadingParams params;
  params.gamma_gr = golden.gamma;
  params.delta_e = energy_variance(h, profile.initial);
  params.n_pc_ipr = profile.inverse_participation();
  params.n_pc_ratio = golden.gamma * rho.density(profile.unperturbed_energy);
  if (hybrid) {
    params.sigma = hybrid->sigma;
    params.band_center = hybrid->band_center;
    params.band_from_fit = true;
  } else {
    params.sigma = params.delta_e;
    params.band_center = profile.first_moment();
  }
  return params;
}

}  // namespace tbri
