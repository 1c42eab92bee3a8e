#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/agent/config.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/geodata/types.hpp"

namespace urbangen::agent {

enum class Stage { kPerception, kImagination, kReflection, kGen3D, kPostProcess, kAligned, kDone, kFailed };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);  // throws Error(kParse)

// Forward steps follow the declared order; Reflection may return to
// Imagination for a refinement round; any live stage may fail; Done and
// Failed are terminal.
bool can_transition(Stage from, Stage to);

struct CritiqueReport {
  std::array<int, 3> scores{0, 0, 0};  // structure sanity, texture realism, structural alignment
  std::array<std::string, 3> reasons;
  std::string guidance;

  int min_score() const;
  int sum() const;
  bool operator==(const CritiqueReport&) const = default;
};

nlohmann::json to_json(const CritiqueReport& report);
CritiqueReport critique_from_json(const nlohmann::json& j);

struct Failure {
  std::string cause;  // e.g. "ImaginerUnavailable", "CriticUnavailable", "NotClosed"
  std::string message;
};

struct BuildingJob {
  std::string building;
  Stage stage = Stage::kPerception;
  int attempts = 0;
  std::map<std::string, std::string> artifacts;  // artifact name -> blob digest
  std::optional<CritiqueReport> best;
  std::string best_image;  // blob digest of the chosen imagination
  bool best_effort = false;
  bool degraded = false;  // imagination ran without street-view crops
  std::optional<Failure> failure;

  // Throws Error(kPrecondition) on an illegal transition.
  void advance(Stage to);
  void fail(Failure failure);
  bool terminal() const { return stage == Stage::kDone || stage == Stage::kFailed; }
};

nlohmann::json to_json(const BuildingJob& job);
BuildingJob job_from_json(const nlohmann::json& j);

// One job per footprint at Perception, ordered by footprint id.
std::vector<BuildingJob> plan(const geodata::RegionModel& region, const PipelineConfig& config);

// Raised by stage code for failures that end a job with a typed cause.
class JobFailure : public Error {
 public:
  JobFailure(std::string cause, ErrorCode code, const std::string& message)
      : Error(code, message), cause_(std::move(cause)) {}
  const std::string& cause() const { return cause_; }

 private:
  std::string cause_;
};

}  // namespace urbangen::agent
