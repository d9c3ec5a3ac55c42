#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lingdiv {

enum class ErrorCode {
  MalformedInput,
  PathNotFound,
  IoFailure,
  ConfigError,
  UnmappedCountry,
  EmptyCell,
  EmptyDistribution,
  NoData,
  DegenerateInput,
  InsufficientData,
  InsufficientMonths,
  InsufficientOverlap,
  NoSignificantCountries,
  ZeroVolume,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnmappedCountry: return "UnmappedCountry";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InsufficientMonths: return "InsufficientMonths";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::NoSignificantCountries: return "NoSignificantCountries";
    case ErrorCode::ZeroVolume: return "ZeroVolume";
  }
  return "Unknown";
}

// All library failures surface as this exception; the code is the stable,
// machine-readable part and the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lingdiv
