#pragma once

#include <stdexcept>
#include <string>

namespace lopashka {

enum class ErrorKind {
  Dimension,        // sizes of inputs disagree
  Domain,           // argument outside the admissible set
  Singular,         // a matrix that must be invertible is not
  SpectralGap,      // eigenvalue too close to the imaginary axis
  LsFailure,        // boundary system not uniquely solvable
  Sector,           // parameter outside the admissible sector
  Consistency,      // an internal cross-check failed
  Precondition,     // caller violated a documented precondition
  Parse,            // malformed input document
  Io,               // file system failure
  Numerical         // iterative method did not converge
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lopashka
