#pragma once

#include <stdexcept>
#include <string>

namespace pathlens {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data, inconsistent dimensions or an invalid configuration.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// No coordinate path satisfies the requested constraints
/// (endpoint outside the reachable set, path length too short, ...).
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configured number of inner solves.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace pathlens
