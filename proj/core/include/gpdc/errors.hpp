#pragma once

#include <stdexcept>
#include <string>

namespace gpdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Raised when a factorization fails even after jitter escalation.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}
  explicit NumericalFailure(const std::string& what) : NumericalFailure(what, 0.0) {}

  /// Ratio of largest to smallest pivot seen before the failure (0 if unknown).
  [[nodiscard]] double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined for the given input (e.g. R² of a constant target).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpdc
