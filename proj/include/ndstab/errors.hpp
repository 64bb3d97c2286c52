#pragma once

#include <stdexcept>
#include <string>

namespace ndstab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed equation file or expression.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Division by zero, non-finite value, or evaluation outside the validity window.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SummaryError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A limit-delay criterion was requested without an analytic `limit_tau`.
class MissingLimit : public Error {
 public:
  using Error::Error;
};

class NotConstant : public Error {
 public:
  using Error::Error;
};

class NotNonDelayed : public Error {
 public:
  using Error::Error;
};

class FixedPointDivergence : public Error {
 public:
  using Error::Error;
};

class PositivityViolation : public Error {
 public:
  using Error::Error;
};

/// An internal bound that must hold by construction was violated.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace ndstab
