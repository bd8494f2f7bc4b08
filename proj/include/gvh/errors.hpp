#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gvh {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration text, model parameters, ranges.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Model constructed with parameters outside the admissible set (e.g. H < 1/2).
class ModelError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// Analytic Volterra kernel requested for a model that has none.
class UnsupportedKernelError : public ModelError {
public:
  using ModelError::ModelError;
};

/// Time arguments passed in the wrong order, or indices out of range.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Numerical failure inside a factorization or solve.
class NumericalError : public Error {
public:
  using Error::Error;
};

class NotPositiveDefiniteError : public NumericalError {
public:
  NotPositiveDefiniteError(std::size_t minor, double jitter)
      : NumericalError("covariance is not positive definite: leading minor " +
                       std::to_string(minor) + " failed with diagonal jitter " +
                       std::to_string(jitter)),
        minor_(minor) {}
  /// 1-based order of the leading minor that failed.
  std::size_t minor() const noexcept { return minor_; }

private:
  std::size_t minor_;
};

class SingularKernelError : public NumericalError {
public:
  explicit SingularKernelError(std::size_t index)
      : NumericalError("singular kernel: zero diagonal pivot at innovation index " +
                       std::to_string(index)),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class UndefinedDerivativeError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Failures of the hedging recursion. These abort a path.
class HedgeError : public Error {
public:
  using Error::Error;
};

class SingularHedgeError : public HedgeError {
public:
  using HedgeError::HedgeError;
};

class DegenerateCostError : public HedgeError {
public:
  using HedgeError::HedgeError;
};

class NoSolutionError : public HedgeError {
public:
  NoSolutionError(double up, double down)
      : HedgeError("position fixed point has no consistent branch (up candidate " +
                   std::to_string(up) + ", down candidate " + std::to_string(down) + ")"),
        up_(up), down_(down) {}
  double up_candidate() const noexcept { return up_; }
  double down_candidate() const noexcept { return down_; }

private:
  double up_;
  double down_;
};

class UnboundedMinimizationError : public HedgeError {
public:
  using HedgeError::HedgeError;
};

}  // namespace gvh
