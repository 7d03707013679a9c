#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qtomo {

enum class ErrorCode {
  kUnknownReceiver,
  kSameReceiver,
  kInvalidTree,
  kInvalidConfiguration,
  kMisplacedJoin,
  kStructuralViolation,
  kInsufficientReceivers,
  kInconsistentAnswer,
  kStalled,
  kTooLarge,
  kBadSpec,
  kParseError,
  kMissingGroundTruth,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (CLI, Python) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace qtomo
