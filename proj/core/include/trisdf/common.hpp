#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace trisdf {

#ifdef TRISDF_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

// Caller passed data that violates an operation's preconditions
// (bad file, bad argument). Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Internal API contract broken (dimension mismatch, out-of-extent
// sample). Indicates a bug in calling code, not bad user input.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Failure while executing an otherwise valid request (I/O, non-finite
// loss). Maps to CLI exit code 1.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trisdf
