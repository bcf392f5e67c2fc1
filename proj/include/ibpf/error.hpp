#pragma once

#include <stdexcept>
#include <string>

namespace ibpf {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Negative masses, sums off by more than the normalization tolerance, empty tables.
class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

/// Vector or operator dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Requested floor cannot be met (floor * N >= 1).
class InfeasibleFloor : public Error {
 public:
  using Error::Error;
};

/// Bad solver / formulation / sweep configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A mass dropped below the floor where a gradient was requested.
class NumericalDomainError : public Error {
 public:
  using Error::Error;
};

/// Operation exceeds what the implementation supports (e.g. dense limit).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ibpf
