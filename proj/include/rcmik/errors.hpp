#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcmik {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON syntax, missing keys, wrong types).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix sizes that do not agree with the chain or problem.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Rotation angle too close to pi for the principal branch of the SE(3) log.
class BranchError : public Error {
 public:
  using Error::Error;
};

/// Tool shaft with coincident endpoints; the RCM projection is undefined.
class DegenerateShaftError : public Error {
 public:
  using Error::Error;
};

/// Closed-loop tracking failure, tagged with the step that failed.
class TrackingError : public Error {
 public:
  TrackingError(std::size_t step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace rcmik
