#include "forestalign/error.hpp"

namespace forestalign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kDegenerateNeighborhood: return "degenerate-neighborhood";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kCollapsedComponent: return "collapsed-component";
    case ErrorCode::kEmptyGroup: return "empty-group";
    case ErrorCode::kDegenerateCorrespondences: return "degenerate-correspondences";
    case ErrorCode::kNoOverlap: return "no-overlap";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::string& stage) {
  std::string out(to_string(code));
  if (!stage.empty()) out += " [" + stage + "]";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(format_message(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const {
  return Error(code_, detail_, std::move(stage));
}

void throw_invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidParameter, message);
}

}  // namespace forestalign
