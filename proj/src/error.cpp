#include "ambient/error.hpp"

namespace ambient {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SampleRateTooLow: return "SampleRateTooLow";
    case Errc::EmptySubcarrierSet: return "EmptySubcarrierSet";
    case Errc::TrajectoryOutOfRange: return "TrajectoryOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case Errc::ZeroMagnitudeSample: return "ZeroMagnitudeSample";
    case Errc::SequenceTooShort: return "SequenceTooShort";
    case Errc::OrderZero: return "OrderZero";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::EmptyFrame: return "EmptyFrame";
    case Errc::ChannelGeometryMismatch: return "ChannelGeometryMismatch";
    case Errc::TimestampOutOfRange: return "TimestampOutOfRange";
    case Errc::PatchSizeIndivisible: return "PatchSizeIndivisible";
    case Errc::IndivisibleDims: return "IndivisibleDims";
    case Errc::NonBinaryTarget: return "NonBinaryTarget";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::EmptyPersonList: return "EmptyPersonList";
    case Errc::RasterMismatch: return "RasterMismatch";
    case Errc::EmptyScoreList: return "EmptyScoreList";
    case Errc::NoVisibleKeypoints: return "NoVisibleKeypoints";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& message, const std::string& stage) {
  std::string out(to_string(code));
  if (!stage.empty()) out += " [" + stage + "]";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace ambient
