#pragma once

#include <stdexcept>
#include <string>

namespace linkvar {

enum class ErrorKind {
  InvalidSpec,
  InvalidResolution,
  ShapeMismatch,
  SpectralGapViolation,
  NoNegativeSpectrum,
  UnresolvedComponent,
  DegenerateNonlinearity,
  NonCoerciveF,
  LambdaNotZero,
  GeometryFailure,
  NoAnticoercivity,
  RhoTooLarge,
  InnerDivergence,
  LineSearchStall,
  CollapseToZero,
  MaxIterExceeded,
  NotMaxwellCase,
  RootFindFailure,
  NumericalFailure,
  ConfigError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace linkvar
