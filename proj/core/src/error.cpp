#include "nptails/error.hpp"

namespace nptails {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::ExtremalOrSuperextremal: return "ExtremalOrSuperextremal";
    case ErrorCode::CustomSignViolation: return "CustomSignViolation";
    case ErrorCode::BelowHorizon: return "BelowHorizon";
    case ErrorCode::TableDomainExceeded: return "TableDomainExceeded";
    case ErrorCode::SupportOutsideGrid: return "SupportOutsideGrid";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::JunctionMismatch: return "JunctionMismatch";
    case ErrorCode::BifurcationSphereSupport: return "BifurcationSphereSupport";
    case ErrorCode::InsufficientRange: return "InsufficientRange";
    case ErrorCode::NonvanishingI0: return "NonvanishingI0";
    case ErrorCode::DivergentCubicLimit: return "DivergentCubicLimit";
    case ErrorCode::PreconditionChainBroken: return "PreconditionChainBroken";
    case ErrorCode::NaNDetected: return "NaNDetected";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ColumnNotRetained: return "ColumnNotRetained";
    case ErrorCode::SignChangeInWindow: return "SignChangeInWindow";
    case ErrorCode::MissingConstant: return "MissingConstant";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nptails
