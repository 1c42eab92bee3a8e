#include "urbangen/common/error.hpp"

namespace urbangen {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPrecondition: return "Precondition";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kData: return "Data";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kNotClosed: return "NotClosed";
    case ErrorCode::kTriangulation: return "Triangulation";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kPerceptionUnavailable: return "PerceptionUnavailable";
    case ErrorCode::kReplayMiss: return "ReplayMiss";
    case ErrorCode::kToolUnavailable: return "ToolUnavailable";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kTransient: return "Transient";
    case ErrorCode::kPrerequisite: return "Prerequisite";
    case ErrorCode::kCorruptLedger: return "CorruptLedger";
  }
  return "Unknown";
}

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return ExitCode::kConfig;
    case ErrorCode::kReplayMiss:
    case ErrorCode::kToolUnavailable:
    case ErrorCode::kProtocol:
    case ErrorCode::kTransient:
      return ExitCode::kTool;
    default:
      return ExitCode::kData;
  }
}

}  // namespace urbangen
