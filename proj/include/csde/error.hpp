#pragma once

#include <stdexcept>
#include <string>

namespace csde {

// Bad input: violated preconditions, malformed configs, out-of-range exponents.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that started from valid input but could not finish honestly
// (non-finite values, failed linear solve, degenerate fit).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace csde
