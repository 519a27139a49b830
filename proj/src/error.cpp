#include "phdinf/error.hpp"

namespace phdinf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::InvalidVector: return "InvalidVector";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateLeverage: return "DegenerateLeverage";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorKind::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::DegenerateEigenvalue: return "DegenerateEigenvalue";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::UndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::InvalidRank:
    case ErrorKind::InvalidEpsilon:
    case ErrorKind::UnsupportedModel:
    case ErrorKind::InvalidModel:
    case ErrorKind::InvalidVector:
      return 2;
    case ErrorKind::InvalidMatrix:
    case ErrorKind::InsufficientData:
    case ErrorKind::MissingColumn:
    case ErrorKind::NonNumericCell:
    case ErrorKind::TooFewRows:
    case ErrorKind::IoError:
      return 3;
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::DegenerateLeverage:
    case ErrorKind::AmbiguousMatch:
    case ErrorKind::DegenerateSpectrum:
    case ErrorKind::DegenerateEigenvalue:
    case ErrorKind::UndefinedCorrelation:
      return 4;
  }
  return 1;
}

}  // namespace phdinf
