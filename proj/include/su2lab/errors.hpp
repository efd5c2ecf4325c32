#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace su2lab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures. Monte Carlo pipelines count these as failed trials.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Direct evaluation would overflow; use evaluate_normalized instead.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<int> unconverged)
      : NumericalError(what), unconverged_(std::move(unconverged)) {}

  const std::vector<int>& unconverged() const noexcept { return unconverged_; }

 private:
  std::vector<int> unconverged_;
};

/// A zero sits on (or numerically on) the integration contour.
class ContourSingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Quadrature hit its node cap before meeting the tolerance.
class AccuracyError : public NumericalError {
 public:
  AccuracyError(const std::string& what, double best_estimate, double gap)
      : NumericalError(what), best_estimate_(best_estimate), gap_(gap) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double gap() const noexcept { return gap_; }

 private:
  double best_estimate_;
  double gap_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what), line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace su2lab
