#pragma once

#include <stdexcept>
#include <string>

namespace varilet {

/// Base for every error raised by the library. The CLI maps subclasses to
/// exit statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input documents, CSV files and invalid field construction.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Field or graph contents violate an invariant (self-loop, dangling id, ...).
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A lens that cannot be built or fails validation.
class LensError : public Error {
 public:
  using Error::Error;
};

/// Coefficient vectors that do not match the basis.
class CoefficientError : public Error {
 public:
  using Error::Error;
};

/// The field has no usable middle space (constant components).
class DegenerateFieldError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluation routes disagree. Signals an internal bug.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace varilet
