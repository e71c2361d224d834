// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/theory.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "tbri/errors.hpp"

namespace tbri {

namespace {

constexpr double kKernelCutoff = 8.0;  // in bandwidths

struct Mesh {
  double start = 0.0;
  double step = 0.0;
  std::size_t nodes = 0;

  double at(std::size_t k) const { return start + step * static_cast<double>(k); }
};

Mesh make_mesh(const Eigen::VectorXd& energies, double bandwidth, std::size_t per_bandwidth) {
  const double lo = energies.minCoeff() - kKernelCutoff * bandwidth;
  const double hi = energies.maxCoeff() + kKernelCutoff * bandwidth;
  const auto by_resolution =
      static_cast<std::size_t>(std::ceil((hi - lo) / bandwidth * static_cast<double>(per_bandwidth)));
  Mesh mesh;
  std::size_t intervals = std::max<std::size_t>(200, by_resolution);
  intervals += intervals % 2;  // even, so the stride-2 subset ends on the last node
  mesh.nodes = intervals + 1;
  mesh.start = lo;
  mesh.step = (hi - lo) / static_cast<double>(mesh.nodes - 1);
  return mesh;
}

/// Samples of sum_k w_k N(E; E_k, h) on the mesh.
std::vector<double> smooth_on_mesh(const Eigen::VectorXd& energies, const Eigen::VectorXd& weights,
                                   double bandwidth, const Mesh& mesh) {
  std::vector<double> out(mesh.nodes, 0.0);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bandwidth);
  const double reach = kKernelCutoff * bandwidth;
  for (Eigen::Index k = 0; k < energies.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const double e = energies[k];
    const auto first = static_cast<std::ptrdiff_t>(std::ceil((e - reach - mesh.start) / mesh.step));
    const auto last = static_cast<std::ptrdiff_t>(std::floor((e + reach - mesh.start) / mesh.step));
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(first, 0);
         j <= std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(mesh.nodes) - 1); ++j) {
      const double z = (mesh.at(static_cast<std::size_t>(j)) - e) / bandwidth;
      out[static_cast<std::size_t>(j)] += w * norm * std::exp(-0.5 * z * z);
    }
  }
  return out;
}

double trapezoid_product(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& rho, const Mesh& mesh, std::size_t stride) {
  double sum = 0.0;
  const std::size_t last = mesh.nodes - 1;
  for (std::size_t j = 0; j <= last; j += stride) {
    if (rho[j] <= 0.0) continue;
    const double value = a[j] * b[j] / rho[j];
    sum += (j == 0 || j == last) ? 0.5 * value : value;
  }
  return sum * mesh.step * static_cast<double>(stride);
}

struct ConvolutionContext {
  Mesh mesh;
  std::vector<double> rho;
  std::vector<double> smoothed_i;
};

ConvolutionContext prepare(const StrengthProfile& profile_i, const Eigen::VectorXd& all_energies,
                           const SpectralStats& rho) {
  ConvolutionContext ctx;
  // 8 nodes per bandwidth; the stride-2 subset gives the convergence check.
  ctx.mesh = make_mesh(all_energies, rho.bandwidth(), 8);
  ctx.rho = smooth_on_mesh(rho.energies(), Eigen::VectorXd::Ones(rho.energies().size()),
                           rho.bandwidth(), ctx.mesh);
  ctx.smoothed_i =
      smooth_on_mesh(profile_i.energies, profile_i.weights, rho.bandwidth(), ctx.mesh);
  return ctx;
}

double convolve_with(const ConvolutionContext& ctx, const std::vector<double>& smoothed_q) {
  const double fine = trapezoid_product(ctx.smoothed_i, smoothed_q, ctx.rho, ctx.mesh, 1);
  const double coarse = trapezoid_product(ctx.smoothed_i, smoothed_q, ctx.rho, ctx.mesh, 2);
  const double scale = std::max(std::abs(fine), 1e-300);
  if (std::abs(fine - coarse) > 1e-3 * scale && std::abs(fine) > 1e-12) {
    throw NumericalError("convolve_strength: quadrature not converged",
                         std::abs(fine - coarse) / scale);
  }
  return fine;
}

/// Number of particles at (beta, mu); numerically stable for large |x|.
double fd_occupation(double x) {
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

double mu_for_beta(const SingleParticleSpectrum& spectrum, int n, double beta) {
  const auto& eps = spectrum.epsilon;
  const auto count = [&](double mu) {
    double total = 0.0;
    for (double e : eps) total += fd_occupation(beta * (e - mu));
    return total - static_cast<double>(n);
  };
  const double reach = 60.0 / beta;
  double lo = eps.front() - reach;
  double hi = eps.back() + reach;
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      count, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.5 * (a + b);
}

double rms_against(std::span<const double> target, const SingleParticleSpectrum& spectrum,
                   double beta, double mu) {
  double sum = 0.0;
  for (std::size_t a = 0; a < target.size(); ++a) {
    const double d = fd_occupation(beta * (spectrum.epsilon[a] - mu)) - target[a];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(target.size()));
}

}  // namespace

std::string_view to_string(SurvivalSource source) {
  switch (source) {
    case SurvivalSource::Exact:
      return "eq14-exactW0";
    case SurvivalSource::BreitWigner:
      return "eq14-modelW0-bw";
    case SurvivalSource::Gaussian:
      return "eq14-modelW0-gauss";
  }
  return "unknown";
}

ThermalizationPrediction predict_occupations(std::span<const double> initial,
                                             std::span<const double> asymptotic,
                                             std::span<const double> survival,
                                             const TimeGrid& grid, SurvivalSource source) {
  if (initial.size() != asymptotic.size()) {
    throw PreconditionError("predict_occupations: initial and asymptotic lengths differ");
  }
  if (survival.size() != grid.size()) {
    throw PreconditionError("predict_occupations: survival series does not match the grid");
  }
  for (double w : survival) {
    if (!(w >= -1e-12 && w <= 1.0 + 1e-12)) {
      throw PreconditionError("predict_occupations: W0 outside [0, 1]");
    }
  }

  ThermalizationPrediction pred;
  pred.grid = grid;
  pred.source = source;
  const auto m = static_cast<Eigen::Index>(initial.size());
  const auto t_count = static_cast<Eigen::Index>(grid.size());
  pred.occupations.resize(m, t_count);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const double w = survival[static_cast<std::size_t>(t)];
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      pred.occupations(a, t) = initial[ua] * w + asymptotic[ua] * (1.0 - w);
    }
  }
  return pred;
}

SurvivalModels survival_models(double gamma, double delta_e, double n_pc, const TimeGrid& grid) {
  if (!(gamma > 0.0) || !(delta_e > 0.0)) {
    throw PreconditionError("survival_models: Gamma and Delta_E must be positive");
  }
  if (!(n_pc > 0.0)) throw PreconditionError("survival_models: N_pc must be positive");
  SurvivalModels models;
  models.saturation = 3.0 / n_pc;
  for (double t : grid.points()) {
    const double bw = std::exp(-gamma * t);
    const double gauss = std::exp(-delta_e * delta_e * t * t);
    models.breit_wigner.push_back(bw);
    models.gaussian.push_back(gauss);
    models.breit_wigner_floored.push_back(std::max(bw, models.saturation));
    models.gaussian_floored.push_back(std::max(gauss, models.saturation));
  }
  return models;
}

PredictionError prediction_error(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& predicted) {
  if (exact.rows() != predicted.rows() || exact.cols() != predicted.cols()) {
    throw PreconditionError("prediction_error: shape mismatch");
  }
  PredictionError err;
  if (exact.size() == 0) return err;
  const Eigen::ArrayXXd diff = (exact - predicted).array().abs();
  err.max = diff.maxCoeff();
  err.rms = std::sqrt(diff.square().mean());
  return err;
}

double convolve_profiles(const StrengthProfile& a, const StrengthProfile& b,
                         const SpectralStats& rho) {
  Eigen::VectorXd all(a.energies.size() + b.energies.size());
  all << a.energies, b.energies;
  const ConvolutionContext ctx = prepare(a, all, rho);
  return convolve_with(ctx, smooth_on_mesh(b.energies, b.weights, rho.bandwidth(), ctx.mesh));
}

double convolve_strength(const StrengthProfile& profile_i, const EigenDecomposition& decomp,
                         const SpectralStats& rho, std::size_t q) {
  return convolve_profiles(profile_i, strength_function(decomp, q), rho);
}

std::vector<double> convolve_strength_all(const StrengthProfile& profile_i,
                                          const EigenDecomposition& decomp,
                                          const SpectralStats& rho) {
  const ConvolutionContext ctx = prepare(profile_i, decomp.energies, rho);
  std::vector<double> out;
  out.reserve(decomp.size());
  for (std::size_t q = 0; q < decomp.size(); ++q) {
    const Eigen::VectorXd w =
        decomp.vectors.row(static_cast<Eigen::Index>(q)).transpose().array().square();
    out.push_back(convolve_with(ctx, smooth_on_mesh(decomp.energies, w, rho.bandwidth(), ctx.mesh)));
  }
  return out;
}

double fermi_dirac(double energy, double temperature, double chemical_potential) {
  if (std::isinf(temperature)) return 0.5;
  if (temperature <= 0.0) {
    if (energy < chemical_potential) return 1.0;
    return energy > chemical_potential ? 0.0 : 0.5;
  }
  return fd_occupation((energy - chemical_potential) / temperature);
}

double fermi_level(const SingleParticleSpectrum& spectrum, int n, double temperature) {
  if (!(temperature > 0.0) || std::isinf(temperature)) {
    throw ParameterError("fermi_level: temperature must be positive and finite");
  }
  if (n <= 0 || n >= spectrum.size()) {
    throw ParameterError("fermi_level: need 0 < n < m");
  }
  return mu_for_beta(spectrum, n, 1.0 / temperature);
}

FermiDiracFit fit_fermi_dirac(std::span<const double> occupations,
                              const SingleParticleSpectrum& spectrum, int n) {
  const auto m = static_cast<std::size_t>(spectrum.size());
  if (occupations.size() != m) {
    throw PreconditionError("fit_fermi_dirac: occupation list length differs from m");
  }
  if (n <= 0 || static_cast<std::size_t>(n) >= m) {
    throw PreconditionError("fit_fermi_dirac: need 0 < n < m");
  }

  const double uniform = static_cast<double>(n) / static_cast<double>(m);
  double uniform_rms = 0.0;
  for (double v : occupations) uniform_rms += (v - uniform) * (v - uniform);
  uniform_rms = std::sqrt(uniform_rms / static_cast<double>(m));

  FermiDiracFit fit;
  const auto infinite = [&] {
    fit.infinite_temperature = true;
    fit.temperature = std::numeric_limits<double>::infinity();
    fit.chemical_potential = std::numeric_limits<double>::quiet_NaN();
    fit.residual = uniform_rms;
    return fit;
  };
  if (uniform_rms <= 1e-9) return infinite();

  // Uniform occupation n/m is reachable at 1/T = 0 only when n/m = 1/2; for
  // other fillings the beta -> 0 limit still tends to the uniform profile.
  const double spacing = std::max(spectrum.mean_spacing(), 1e-12);
  const double log_beta_lo = std::log(1e-6 / spacing);
  const double log_beta_hi = std::log(1e3 / spacing);
  const auto objective = [&](double log_beta) {
    const double beta = std::exp(log_beta);
    return rms_against(occupations, spectrum, beta, mu_for_beta(spectrum, n, beta));
  };

  constexpr int kScan = 91;
  double best_x = log_beta_lo;
  double best_f = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < kScan; ++k) {
    const double x = log_beta_lo + (log_beta_hi - log_beta_lo) * k / (kScan - 1);
    const double f = objective(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
      best_k = k;
    }
  }
  const double step = (log_beta_hi - log_beta_lo) / (kScan - 1);
  const double lo = std::max(log_beta_lo, best_x - step);
  const double hi = std::min(log_beta_hi, best_x + step);
  std::uintmax_t iterations = 200;
  const auto [x_min, f_min] =
      boost::math::tools::brent_find_minima(objective, lo, hi, 50, iterations);
  if (f_min < best_f) {
    best_f = f_min;
    best_x = x_min;
  }

  if (best_k == 0 || uniform_rms <= best_f) return infinite();

  const double beta = std::exp(best_x);
  fit.temperature = 1.0 / beta;
  fit.chemical_potential = mu_for_beta(spectrum, n, beta);
  fit.residual = best_f;
  return fit;
}

}  // namespace tbri
