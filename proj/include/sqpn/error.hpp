#pragma once

#include <stdexcept>
#include <string>

namespace sqpn {

/// Base of every exception thrown by the library. All of them are domain
/// errors: the CLI maps them to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented precondition, e.g. an
/// unquantified node where probabilities are required.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Evidence has probability zero under the network.
class InconsistentEvidence : public Error {
 public:
  using Error::Error;
};

}  // namespace sqpn
