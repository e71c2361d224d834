// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tbri {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside its mathematical domain (n > m, eta < 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Operation called on inputs violating its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Numerical stage failed or produced results outside verified tolerances.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class InsufficientStatistics : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Least-squares fit did not converge; carries the last iterate.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, std::vector<double> last_iterate, double residual)
      : NumericalError(what, residual), last_iterate_(std::move(last_iterate)) {}
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbri
