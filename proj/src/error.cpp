#include "rws/error.hpp"

namespace rws {

std::string_view error_tag(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidPrecondition: return "invalid-precondition";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::NoDivergenceSequence: return "no-divergence-sequence";
    case ErrorKind::PlacementInfeasible: return "placement-infeasible";
    case ErrorKind::UnsupportedFamily: return "unsupported-family";
  }
  return "unknown";
}

}  // namespace rws
