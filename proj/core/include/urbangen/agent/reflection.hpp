#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/agent/config.hpp"
#include "urbangen/agent/job.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::agent {

// Whole numbers print without decimals, anything else with one decimal.
std::string format_quantity(double value);
std::string volume_description(double footprint_area, double height);

struct ImaginationInputs {
  std::string building;
  const RgbImage* scaffold = nullptr;  // required
  std::vector<RgbImage> views;         // curated crops, best first
  double footprint_area = 0.0;
  double height = 0.0;
  std::string guidance;  // critique of the previous attempt, if any
};

// Images first (scaffold, then views), then the imagination template with the
// volume description filled in, then refinement guidance when present.
// Throws Error(kPrecondition) without a scaffold render.
tools::ToolRequest build_imagination_prompt(const ImaginationInputs& inputs);

// Strict {"score": integer 0-5, "reason": string}; anything else raises
// Error(kProtocol).
std::pair<int, std::string> parse_critic_record(const nlohmann::json& record);

// Issues the three rubric requests and assembles one report. Guidance lists
// the rubrics scoring below `accept_threshold` with their reasons.
CritiqueReport reflect(const RgbImage& image, const RgbImage& scaffold, std::span<const RgbImage> views,
                       tools::Toolbox& toolbox, int accept_threshold = 4);

struct Attempt {
  std::vector<std::uint8_t> image_png;
  CritiqueReport report;
  std::string request_digest;
};

struct RefineResult {
  std::vector<Attempt> attempts;
  std::size_t chosen = 0;
  bool accepted = false;
  bool best_effort = false;

  const Attempt& best() const { return attempts.at(chosen); }
};

using AttemptObserver = std::function<void(int attempt, const Attempt&)>;

// Generate, reflect, accept when min score >= accept_threshold, otherwise feed
// the guidance into the next prompt. After max_attempts the attempt with the
// highest score sum (earliest on ties) is returned as best effort. Tool
// failures surface as JobFailure with cause ImaginerUnavailable,
// CriticUnavailable or CriticProtocolError.
RefineResult refine_loop(ImaginationInputs inputs, tools::Toolbox& toolbox, const PipelineConfig& config,
                         const AttemptObserver& observer = {});

enum class DetectionAction { kProceed, kDegrade, kFail };
struct DetectionDecision {
  DetectionAction action = DetectionAction::kDegrade;
  std::vector<std::size_t> selected;  // indices into the input, best first
};
// Fail on confidences outside [0, 1]; degrade when none reaches the
// detection threshold; otherwise proceed with the top_k_views best.
DetectionDecision decide(std::span<const double> confidences, const PipelineConfig& config);

enum class ReportAction { kAccept, kRefine, kGiveUp };
ReportAction decide(const CritiqueReport& report, int attempts, const PipelineConfig& config);

}  // namespace urbangen::agent
