#pragma once

#include <stdexcept>
#include <string>

namespace evolab {

/// Base class of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: singular step matrix, non-finite values, divergent integrals.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Eigenvector basis too ill-conditioned for the diagonalization route.
class DefectiveMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace evolab
