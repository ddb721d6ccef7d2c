#pragma once

#include <stdexcept>
#include <string>

namespace linkorbit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices/vectors/loops do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A time integration produced non-finite values or lost symplecticity.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// The operation does not apply to the given model (e.g. non-autonomous).
class InapplicableError : public Error {
 public:
  using Error::Error;
};

}  // namespace linkorbit
