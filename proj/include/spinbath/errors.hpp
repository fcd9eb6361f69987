#pragma once

#include <stdexcept>
#include <string>

namespace spinbath {

// Malformed user input: bad config keys, inconsistent model, invalid grids.
// The CLI maps this (and std::invalid_argument) to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An algorithm failed its numerical contract: quadrature did not converge,
// integrator lost trace or positivity, no unique stationary state.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spinbath
