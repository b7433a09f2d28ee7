#pragma once

#include <stdexcept>
#include <string>

namespace stoptime {

// Bad or unsupported input: malformed payloads, unsupported base/depth
// combinations, enumeration caps exceeded.  CLI maps this to exit code 2.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// A documented precondition of an operation was violated (truncation
// mismatch, zero diagonal entry, diagonal below delta, ...).  CLI maps
// this to exit code 3.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stoptime
