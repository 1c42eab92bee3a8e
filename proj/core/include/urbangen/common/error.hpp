#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace urbangen {

enum class ErrorCode {
  kPrecondition,
  kParse,
  kConfig,
  kData,
  kDegenerate,
  kNotClosed,
  kTriangulation,
  kIo,
  kPerceptionUnavailable,
  kReplayMiss,
  kToolUnavailable,
  kProtocol,
  kTransient,
  kPrerequisite,
  kCorruptLedger,
};

const char* to_string(ErrorCode code);

// Process exit codes are a stable contract of the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kTool = 3,
  kData = 4,
};

ExitCode exit_code_for(ErrorCode code);

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
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(ErrorCode::kParse, message + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class ReplayMiss : public Error {
 public:
  explicit ReplayMiss(const std::string& digest)
      : Error(ErrorCode::kReplayMiss, "replay cache miss for request " + digest), digest_(digest) {}

  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

}  // namespace urbangen
