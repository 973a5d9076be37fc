#pragma once

#include <stdexcept>
#include <string>

namespace qsel {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidInput,
  NotSemipositive,
  KernelNotIsotropic,
  CutoffTooSmall,
  InvalidGraph,
  NotAtMinimum,
  DegenerateFamily,
  DimensionCap,
  GridTooCoarse,
  GridTooLarge,
  ModelInvalid,
  WindowEmpty,
  UnreliableWindow,
  QuadratureFail,
  SmoothnessMismatch,
  InfeasibleCutoff,
  NoConvergence,
  MissingGolden,
  ResolutionTooCoarse,
  ParamOutOfRange,
  DegreeTooLarge,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qsel
