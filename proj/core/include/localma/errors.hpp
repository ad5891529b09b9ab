#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace localma {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteValue,
  NotOnSimplex,
  NotOneHot,
  EmptySplit,
  BadDims,
  NonFiniteLoss,
  ShapeMismatch,
  LengthMismatch,
  LabelOutOfRange,
  InvalidConfig,
  ParseError,
  LayoutMismatch,
  VersionMismatch,
  CorruptFile,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (and tests) can branch on the category rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace localma
