#include "qsel/error.hpp"

namespace qsel {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotSemipositive: return "NotSemipositive";
    case ErrorKind::KernelNotIsotropic: return "KernelNotIsotropic";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::NotAtMinimum: return "NotAtMinimum";
    case ErrorKind::DegenerateFamily: return "DegenerateFamily";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::ModelInvalid: return "ModelInvalid";
    case ErrorKind::WindowEmpty: return "WindowEmpty";
    case ErrorKind::UnreliableWindow: return "UnreliableWindow";
    case ErrorKind::QuadratureFail: return "QuadratureFail";
    case ErrorKind::SmoothnessMismatch: return "SmoothnessMismatch";
    case ErrorKind::InfeasibleCutoff: return "InfeasibleCutoff";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::MissingGolden: return "MissingGolden";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
  }
  return "Unknown";
}

}  // namespace qsel
