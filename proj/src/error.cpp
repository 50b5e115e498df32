#include "lgp/error.hpp"

namespace lgp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input:
      return "InvalidInput";
    case ErrorCode::outside_annulus:
      return "OutsideAnnulus";
    case ErrorCode::decomposition_ambiguous:
      return "DecompositionAmbiguous";
    case ErrorCode::mass_mismatch:
      return "MassMismatch";
    case ErrorCode::missing_anchor:
      return "MissingAnchor";
    case ErrorCode::empty_measure:
      return "EmptyMeasure";
    case ErrorCode::level_mismatch:
      return "LevelMismatch";
    case ErrorCode::uncovered_cell:
      return "UncoveredCell";
    case ErrorCode::config:
      return "ConfigError";
    case ErrorCode::internal:
      return "InternalError";
  }
  return "Unknown";
}

}  // namespace lgp
