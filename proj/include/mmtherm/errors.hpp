// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mmtherm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
struct DomainError : Error {
  using Error::Error;
};

/// Parameter point outside the feasible region (some eigenvalue below the cutoff).
struct InfeasibleError : Error {
  using Error::Error;
};

/// Integral does not exist: the weight is improper on the requested region.
struct DivergenceError : Error {
  double estimate;
  DivergenceError(const std::string& what, double estimate_)
      : Error(what), estimate(estimate_) {}
};

/// Quadrature could not reach the requested tolerance.
struct QuadratureError : Error {
  double estimate;
  double error;
  QuadratureError(const std::string& what, double estimate_, double error_)
      : Error(what), estimate(estimate_), error(error_) {}
};

}  // namespace mmtherm
