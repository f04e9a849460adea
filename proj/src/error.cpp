#include "exactreg/error.hpp"

namespace exactreg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::NotInscribed: return "not-inscribed";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Unbounded: return "unbounded";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Tie: return "tie";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::MissingInput: return "missing-input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace exactreg
