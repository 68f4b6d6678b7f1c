#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ambient {

enum class Errc {
  InvalidArgument,
  SampleRateTooLow,
  EmptySubcarrierSet,
  TrajectoryOutOfRange,
  LengthMismatch,
  RateMismatch,
  CutoffAboveNyquist,
  ZeroMagnitudeSample,
  SequenceTooShort,
  OrderZero,
  TooFewPoints,
  EmptyFrame,
  ChannelGeometryMismatch,
  TimestampOutOfRange,
  PatchSizeIndivisible,
  IndivisibleDims,
  NonBinaryTarget,
  DimMismatch,
  EmptyPersonList,
  RasterMismatch,
  EmptyScoreList,
  NoVisibleKeypoints,
  ParseError,
  ValidationError,
  SchemaError,
  IoError,
};

std::string_view to_string(Errc code);

// Single exception type for the library. `stage` is filled in when an error
// crosses a pipeline boundary (e.g. "bias", "lof", "sanitize").
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string stage = {});

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const;

 private:
  Errc code_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace ambient
