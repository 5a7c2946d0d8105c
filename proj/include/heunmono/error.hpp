#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heunmono {

enum class ErrorCode {
  SingularMatrix,
  InvalidInput,
  NotUnitary,
  DegenerateForm,
  PoleProximity,
  ContourTooLarge,
  StepUnderflow,
  ExponentMismatch,
  AgmNonConvergence,
  LatticeProximity,
  ParallelDerivatives,
  ZeroLatticePoint,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "singular_matrix";
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::NotUnitary: return "not_unitary";
    case ErrorCode::DegenerateForm: return "degenerate_form";
    case ErrorCode::PoleProximity: return "pole_proximity";
    case ErrorCode::ContourTooLarge: return "contour_too_large";
    case ErrorCode::StepUnderflow: return "step_underflow";
    case ErrorCode::ExponentMismatch: return "exponent_mismatch";
    case ErrorCode::AgmNonConvergence: return "agm_non_convergence";
    case ErrorCode::LatticeProximity: return "lattice_proximity";
    case ErrorCode::ParallelDerivatives: return "parallel_derivatives";
    case ErrorCode::ZeroLatticePoint: return "zero_lattice_point";
  }
  return "unknown";
}

// Every numerical failure in the library is reported through this type so the
// CLI can map it onto a machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace heunmono
