#include "xaug/error.hpp"

namespace xaug {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::DegenerateVolume: return "DegenerateVolume";
    case ErrorKind::DegenerateIntensityRange: return "DegenerateIntensityRange";
    case ErrorKind::PatchLargerThanSlice: return "PatchLargerThanSlice";
    case ErrorKind::UncoveredPixel: return "UncoveredPixel";
    case ErrorKind::PatchOutOfBounds: return "PatchOutOfBounds";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::OddSpatialDims: return "OddSpatialDims";
    case ErrorKind::BadSpatialSize: return "BadSpatialSize";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyCohort: return "EmptyCohort";
    case ErrorKind::ConfigInfeasible: return "ConfigInfeasible";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IncompleteGrid: return "IncompleteGrid";
    case ErrorKind::BadFormat: return "BadFormat";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace xaug
