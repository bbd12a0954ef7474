#include "lopashka/error.hpp"

namespace lopashka {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension mismatch";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Singular: return "singular matrix";
    case ErrorKind::SpectralGap: return "spectral gap violated";
    case ErrorKind::LsFailure: return "LS fails";
    case ErrorKind::Sector: return "sector violation";
    case ErrorKind::Consistency: return "inconsistency";
    case ErrorKind::Precondition: return "precondition violated";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "io error";
    case ErrorKind::Numerical: return "numerical failure";
  }
  return "error";
}

}  // namespace lopashka
