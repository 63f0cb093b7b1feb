#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pprior {

enum class ErrorCode {
  NonConverged,
  RejectionStall,
  OverlappingRegions,
  ZeroIntensity,
  DivergentIntensity,
  Domain,
  DegenerateSsq,
  CoincidentCoordinates,
  NonNormalizable,
  TooFewSamples,
  Inconclusive,
  NotObservable,
  Config,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConverged: return "NON_CONVERGED";
    case ErrorCode::RejectionStall: return "REJECTION_STALL";
    case ErrorCode::OverlappingRegions: return "OVERLAPPING_REGIONS";
    case ErrorCode::ZeroIntensity: return "ZERO_INTENSITY";
    case ErrorCode::DivergentIntensity: return "DIVERGENT_INTENSITY";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::DegenerateSsq: return "DEGENERATE_SSQ";
    case ErrorCode::CoincidentCoordinates: return "COINCIDENT_COORDINATES";
    case ErrorCode::NonNormalizable: return "NON_NORMALIZABLE";
    case ErrorCode::TooFewSamples: return "TOO_FEW_SAMPLES";
    case ErrorCode::Inconclusive: return "INCONCLUSIVE";
    case ErrorCode::NotObservable: return "NOT_OBSERVABLE";
    case ErrorCode::Config: return "CONFIG";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries one of the codes above; the
/// message always starts with the code name so CLI output can be grepped.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace pprior
