#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forestalign {

enum class ErrorCode {
  kInvalidParameter,
  kEmptyInput,
  kDegenerateNeighborhood,
  kInsufficientData,
  kCollapsedComponent,
  kEmptyGroup,
  kDegenerateCorrespondences,
  kNoOverlap,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
///
/// `stage()` names the pipeline stage that failed ("downsample", "normals",
/// "vmf", ...) when the error crossed a stage boundary; it is empty for
/// errors raised directly by a building block.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Copy of this error tagged with a pipeline stage.
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] void throw_invalid(const std::string& message);

}  // namespace forestalign
