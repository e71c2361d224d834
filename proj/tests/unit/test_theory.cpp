// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tbri/errors.hpp"
#include "tbri/theory.hpp"

using namespace tbri;

namespace {

SingleParticleSpectrum ladder(int m, double d0 = 1.0) {
  SingleParticleSpectrum s;
  for (int k = 0; k < m; ++k) s.epsilon.push_back(d0 * k);
  return s;
}

StrengthProfile profile(std::vector<double> e, std::vector<double> w) {
  StrengthProfile p;
  p.energies = Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  p.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return p;
}

}  // namespace

TEST_CASE("relaxation formula interpolates between initial and asymptotic values") {
  const std::vector<double> n0{1.0, 1.0, 0.0, 0.0};
  const std::vector<double> ninf{0.6, 0.5, 0.5, 0.4};
  const TimeGrid grid({0.0, 1.0, 2.0});
  const std::vector<double> w0{1.0, 0.25, 0.0};
  const ThermalizationPrediction p = predict_occupations(n0, ninf, w0, grid);
  CHECK(p.occupations.rows() == 4);
  CHECK(p.occupations.cols() == 3);
  for (int a = 0; a < 4; ++a) {
    CHECK(p.occupations(a, 0) == n0[static_cast<std::size_t>(a)]);
    CHECK(p.occupations(a, 2) == ninf[static_cast<std::size_t>(a)]);
  }
  CHECK(p.occupations(0, 1) == doctest::Approx(0.25 + 0.75 * 0.6));
  CHECK(p.occupations(3, 1) == doctest::Approx(0.75 * 0.4));
  CHECK(to_string(p.source) == "eq14-exactW0");
}

TEST_CASE("relaxation formula preconditions") {
  const TimeGrid grid({0.0, 1.0});
  CHECK_THROWS_AS(predict_occupations(std::vector<double>{1, 0}, std::vector<double>{0.5}, std::vector<double>{1, 0.5}, grid),
                  PreconditionError);
  CHECK_THROWS_AS(predict_occupations(std::vector<double>{1}, std::vector<double>{0.5}, std::vector<double>{1}, grid),
                  PreconditionError);
  CHECK_THROWS_AS(predict_occupations(std::vector<double>{1}, std::vector<double>{0.5}, std::vector<double>{1, 1.5}, grid),
                  PreconditionError);
}

TEST_CASE("survival models") {
  const TimeGrid grid({0.0, 0.5, 10.0});
  const SurvivalModels s = survival_models(2.0, 3.0, 100.0, grid);
  CHECK(s.saturation == doctest::Approx(0.03));
  CHECK(s.breit_wigner[1] == doctest::Approx(std::exp(-1.0)));
  CHECK(s.gaussian[1] == doctest::Approx(std::exp(-2.25)));
  CHECK(s.breit_wigner_floored[2] == doctest::Approx(0.03));
  CHECK(s.gaussian_floored[0] == 1.0);
  CHECK_THROWS_AS(survival_models(0.0, 1.0, 1.0, grid), PreconditionError);
  CHECK_THROWS_AS(survival_models(1.0, 1.0, 0.0, grid), PreconditionError);
}

TEST_CASE("prediction error norms") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 0, 0, 0;
  b << 0.1, -0.1, 0.3, 0.1;
  const PredictionError e = prediction_error(a, b);
  CHECK(e.max == doctest::Approx(0.3));
  CHECK(e.rms == doctest::Approx(std::sqrt((0.01 + 0.01 + 0.09 + 0.01) / 4.0)));
  CHECK_THROWS_AS(prediction_error(a, Eigen::MatrixXd(3, 2)), PreconditionError);
}

TEST_CASE("convolution matches brute-force quadrature") {
  // Dense comb for rho, two narrow profiles.
  std::vector<double> levels;
  for (int k = 0; k < 400; ++k) levels.push_back(-10.0 + 0.05 * k + 0.01 * std::sin(k));
  Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(levels.data(), 400);
  const SpectralStats rho(e, 0.15, 0.05, 0.0);
  const StrengthProfile a = profile({-0.5, -0.2, 0.1, 0.4}, {0.1, 0.4, 0.3, 0.2});
  const StrengthProfile b = profile({-0.3, 0.0, 0.2}, {0.5, 0.25, 0.25});

  const double h = rho.bandwidth();
  const auto smooth = [h](const StrengthProfile& p, double x) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < p.energies.size(); ++k) {
      const double z = (x - p.energies[k]) / h;
      s += p.weights[k] * std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * h);
    }
    return s;
  };
  double expected = 0.0;
  const int steps = 200000;
  const double lo = -3.0, hi = 3.0, dx = (hi - lo) / steps;
  for (int k = 0; k <= steps; ++k) {
    const double x = lo + k * dx;
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    expected += w * smooth(a, x) * smooth(b, x) / rho.density(x);
  }
  expected *= dx;
  CHECK(convolve_profiles(a, b, rho) == doctest::Approx(expected).epsilon(1e-4));
  // Symmetric in its arguments.
  CHECK(convolve_profiles(b, a, rho) == doctest::Approx(convolve_profiles(a, b, rho)).epsilon(1e-9));
}

TEST_CASE("Fermi-Dirac occupation and chemical potential") {
  CHECK(fermi_dirac(1.0, 0.5, 1.0) == 0.5);
  CHECK(fermi_dirac(0.0, 1.0, 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(fermi_dirac(-1.0, 0.0, 0.0) == 1.0);
  CHECK(fermi_dirac(3.0, INFINITY, 0.0) == 0.5);
  const SingleParticleSpectrum eps = ladder(12);
  // Particle-hole symmetric ladder at half filling: mu sits at the centre.
  CHECK(fermi_level(eps, 6, 2.0) == doctest::Approx(5.5));
  double total = 0.0;
  const double mu = fermi_level(eps, 4, 1.3);
  for (double e : eps.epsilon) total += fermi_dirac(e, 1.3, mu);
  CHECK(total == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(fermi_level(eps, 0, 1.0), ParameterError);
  CHECK_THROWS_AS(fermi_level(eps, 4, 0.0), ParameterError);
}

TEST_CASE("Fermi-Dirac fit recovers a synthetic temperature") {
  const SingleParticleSpectrum eps = ladder(12);
  for (double temperature : {0.7, 2.0, 8.0}) {
    const double mu = fermi_level(eps, 5, temperature);
    std::vector<double> occ;
    for (double e : eps.epsilon) occ.push_back(fermi_dirac(e, temperature, mu));
    const FermiDiracFit fit = fit_fermi_dirac(occ, eps, 5);
    CHECK_FALSE(fit.infinite_temperature);
    CHECK(fit.temperature == doctest::Approx(temperature).epsilon(1e-4));
    CHECK(fit.chemical_potential == doctest::Approx(mu).epsilon(1e-4));
    CHECK(fit.residual < 1e-6);
  }
}

TEST_CASE("uniform occupations mean infinite temperature") {
  const SingleParticleSpectrum eps = ladder(12);
  const FermiDiracFit fit = fit_fermi_dirac(std::vector<double>(12, 0.5), eps, 6);
  CHECK(fit.infinite_temperature);
  CHECK(std::isinf(fit.temperature));
  CHECK(std::isnan(fit.chemical_potential));
  CHECK(fit.residual == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(fit_fermi_dirac(std::vector<double>(5, 0.5), eps, 6), PreconditionError);
}
