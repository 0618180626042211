#pragma once

#include <stdexcept>
#include <string>

namespace hpdgeo {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input-side failures: malformed files, invalid matrices, impossible configurations.
class InputError : public Error {
public:
  using Error::Error;
};

class DimensionError : public InputError {
public:
  using InputError::InputError;
};

class ParseError : public InputError {
public:
  using InputError::InputError;
};

class HermiticityError : public InputError {
public:
  using InputError::InputError;
};

class PositivityError : public InputError {
public:
  using InputError::InputError;
};

class ToeplitzStructureError : public InputError {
public:
  using InputError::InputError;
};

/// Requested a mode the given configuration cannot support
/// (e.g. the manifold-side controller on a system without a chart inverse).
class UnsupportedConfigError : public InputError {
public:
  using InputError::InputError;
};

/// Target matrix does not lie on the system's output submanifold.
class OffManifoldError : public InputError {
public:
  using InputError::InputError;
};

class IoError : public InputError {
public:
  using InputError::InputError;
};

/// Numerical failures encountered mid-computation.
class NumericalError : public Error {
public:
  using Error::Error;
};

class EigenSolverError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Scalar function applied outside its domain (e.g. log of a non-positive eigenvalue).
class DomainError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Matrix exponential would overflow double precision.
class RangeError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Fisher metric singular or too ill-conditioned to solve against.
class MetricSingularError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace hpdgeo
