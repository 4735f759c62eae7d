#pragma once

#include <stdexcept>
#include <string>

namespace koopgen {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Matrix or vector dimensions do not agree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A factorization or iteration failed, or produced non-finite output.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Eigenvector basis is too ill-conditioned for an eigendecomposition-based
/// matrix function.
class DefectiveMatrix : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// An eigenvalue sits on (or numerically at) the branch cut of the principal
/// logarithm.
class BranchCut : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// The adaptive integrator could not make progress.
class StiffnessError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// The data does not carry enough information for the requested solve.
class DegenerateData : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// A dictionary lacks a coordinate observable x_j that an operation needs.
class MissingCoordinate : public Error {
 public:
  using Error::Error;
};

/// Sublevel set extraction found no region around the equilibrium.
class EmptyRegion : public Error {
 public:
  using Error::Error;
};

/// Raised when a self-check that can only fail through a bug fails.
class InternalConsistency : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration input (file, field or flag).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace koopgen
