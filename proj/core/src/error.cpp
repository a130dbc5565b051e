#include "linkvar/error.hpp"

namespace linkvar {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidResolution: return "InvalidResolution";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::SpectralGapViolation: return "SpectralGapViolation";
    case ErrorKind::NoNegativeSpectrum: return "NoNegativeSpectrum";
    case ErrorKind::UnresolvedComponent: return "UnresolvedComponent";
    case ErrorKind::DegenerateNonlinearity: return "DegenerateNonlinearity";
    case ErrorKind::NonCoerciveF: return "NonCoerciveF";
    case ErrorKind::LambdaNotZero: return "LambdaNotZero";
    case ErrorKind::GeometryFailure: return "GeometryFailure";
    case ErrorKind::NoAnticoercivity: return "NoAnticoercivity";
    case ErrorKind::RhoTooLarge: return "RhoTooLarge";
    case ErrorKind::InnerDivergence: return "InnerDivergence";
    case ErrorKind::LineSearchStall: return "LineSearchStall";
    case ErrorKind::CollapseToZero: return "CollapseToZero";
    case ErrorKind::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorKind::NotMaxwellCase: return "NotMaxwellCase";
    case ErrorKind::RootFindFailure: return "RootFindFailure";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace linkvar
