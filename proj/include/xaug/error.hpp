#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xaug {

/// Failure classes raised by the pipeline. Every throw site picks exactly one.
enum class ErrorKind {
  BadMagic,
  UnsupportedDatatype,
  TruncatedData,
  BadHeader,
  DegenerateVolume,
  DegenerateIntensityRange,
  PatchLargerThanSlice,
  UncoveredPixel,
  PatchOutOfBounds,
  DimensionMismatch,
  ShapeMismatch,
  OddSpatialDims,
  BadSpatialSize,
  EmptyDataset,
  EmptyCohort,
  ConfigInfeasible,
  InvalidConfig,
  IncompleteGrid,
  BadFormat,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace xaug
