#include "urbangen/agent/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "urbangen/common/assets.hpp"
#include "urbangen/common/error.hpp"

namespace urbangen::agent {

using nlohmann::json;
using tools::Part;
using tools::ToolKind;
using tools::ToolRequest;

namespace {

constexpr const char* kRubricNames[] = {"structure sanity", "texture realism", "structural alignment"};
constexpr const char* kRubricPrompts[] = {"prompts/critic_structure_sanity.txt", "prompts/critic_texture_realism.txt",
                                          "prompts/critic_structural_alignment.txt"};

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

bool is_tool_outage(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kToolUnavailable:
    case ErrorCode::kReplayMiss:
    case ErrorCode::kTransient: return true;
    default: return false;
  }
}

}  // namespace

std::string format_quantity(double value) {
  const double r = std::round(value);
  if (std::abs(value - r) < 0.05) return fmt::format("{}", static_cast<long long>(r));
  return fmt::format("{:.1f}", value);
}

std::string volume_description(double area, double height) {
  return fmt::format("This building has a footprint of {} m² and height {} m, for a volume of about {} m³.",
                     format_quantity(area), format_quantity(height), format_quantity(area * height));
}

ToolRequest build_imagination_prompt(const ImaginationInputs& in) {
  if (!in.scaffold || in.scaffold->empty()) {
    throw Error(ErrorCode::kPrecondition, "imagination prompt for " + in.building + " needs a scaffold render");
  }
  ToolRequest req;
  req.tool = ToolKind::kImaginer;
  req.parts.push_back(Part::make_image(*in.scaffold));
  for (const auto& v : in.views) req.parts.push_back(Part::make_image(v));
  req.parts.push_back(Part::make_text(replace_all(std::string(assets::get("prompts/imagination.txt")),
                                                  "{volume_description}",
                                                  volume_description(in.footprint_area, in.height))));
  if (!in.guidance.empty()) {
    req.parts.push_back(Part::make_text(
        replace_all(std::string(assets::get("prompts/refinement_guidance.txt")), "{guidance}", in.guidance)));
  }
  req.params = {{"temperature", 0.9}};
  return req;
}

std::pair<int, std::string> parse_critic_record(const json& record) {
  if (!record.is_object()) throw Error(ErrorCode::kProtocol, "critic response is not a JSON object");
  const auto score = record.find("score");
  const auto reason = record.find("reason");
  if (score == record.end() || !score->is_number_integer()) {
    throw Error(ErrorCode::kProtocol, "critic response lacks an integer 'score'");
  }
  if (reason == record.end() || !reason->is_string()) throw Error(ErrorCode::kProtocol, "critic response lacks a 'reason'");
  const auto value = score->get<long long>();
  if (value < 0 || value > 5) throw Error(ErrorCode::kProtocol, fmt::format("critic score {} outside [0, 5]", value));
  return {static_cast<int>(value), reason->get<std::string>()};
}

CritiqueReport reflect(const RgbImage& image, const RgbImage& scaffold, std::span<const RgbImage> views,
                       tools::Toolbox& toolbox, int accept_threshold) {
  if (image.empty()) throw Error(ErrorCode::kPrecondition, "reflection needs a non-empty image");
  CritiqueReport report;
  std::string guidance;
  for (int r = 0; r < 3; ++r) {
    ToolRequest req;
    req.tool = ToolKind::kCritic;
    req.parts.push_back(Part::make_image(image));
    if (r == 1) {
      for (const auto& v : views) req.parts.push_back(Part::make_image(v));
    } else if (r == 2) {
      req.parts.push_back(Part::make_image(scaffold));
    }
    req.parts.push_back(Part::make_text(std::string(assets::get(kRubricPrompts[r]))));
    const auto resp = toolbox.call(std::move(req));
    if (resp.type != tools::Modality::kRecord) throw Error(ErrorCode::kProtocol, "critic returned no record");
    auto [score, reason] = parse_critic_record(resp.record);
    report.scores[static_cast<std::size_t>(r)] = score;
    report.reasons[static_cast<std::size_t>(r)] = reason;
    if (score < accept_threshold) {
      guidance += fmt::format("- {} ({}/5): {}\n", kRubricNames[r], score, reason);
    }
  }
  report.guidance = guidance;
  return report;
}

RefineResult refine_loop(ImaginationInputs inputs, tools::Toolbox& toolbox, const PipelineConfig& config,
                         const AttemptObserver& observer) {
  if (!inputs.scaffold) throw Error(ErrorCode::kPrecondition, "refine loop needs a scaffold render");
  RefineResult result;
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    ToolRequest req = build_imagination_prompt(inputs);
    Attempt a;
    a.request_digest = toolbox.key_for(req).digest;
    RgbImage image;
    try {
      const auto resp = toolbox.call(std::move(req));
      a.image_png = resp.image_png;
      image = resp.image();
    } catch (const JobFailure&) {
      throw;
    } catch (const Error& e) {
      throw JobFailure("ImaginerUnavailable", e.code(), e.what());
    }
    try {
      a.report = reflect(image, *inputs.scaffold, inputs.views, toolbox, config.accept_threshold);
    } catch (const Error& e) {
      if (is_tool_outage(e)) throw JobFailure("CriticUnavailable", e.code(), e.what());
      if (e.code() == ErrorCode::kProtocol) throw JobFailure("CriticProtocolError", e.code(), e.what());
      throw;
    }
    result.attempts.push_back(std::move(a));
    if (observer) observer(attempt, result.attempts.back());
    const auto action = decide(result.attempts.back().report, attempt, config);
    if (action == ReportAction::kAccept) {
      result.chosen = result.attempts.size() - 1;
      result.accepted = true;
      return result;
    }
    if (action == ReportAction::kGiveUp) break;
    inputs.guidance = result.attempts.back().report.guidance;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.attempts.size(); ++i) {
    if (result.attempts[i].report.sum() > result.attempts[best].report.sum()) best = i;
  }
  result.chosen = best;
  result.best_effort = true;
  return result;
}

DetectionDecision decide(std::span<const double> confidences, const PipelineConfig& config) {
  DetectionDecision d;
  for (double c : confidences) {
    if (!(c >= 0.0 && c <= 1.0)) {
      d.action = DetectionAction::kFail;
      return d;
    }
  }
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    if (confidences[i] >= config.detection_threshold) d.selected.push_back(i);
  }
  if (d.selected.empty()) {
    d.action = DetectionAction::kDegrade;
    return d;
  }
  std::stable_sort(d.selected.begin(), d.selected.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] > confidences[b]; });
  if (d.selected.size() > static_cast<std::size_t>(config.top_k_views)) d.selected.resize(config.top_k_views);
  d.action = DetectionAction::kProceed;
  return d;
}

ReportAction decide(const CritiqueReport& report, int attempts, const PipelineConfig& config) {
  if (report.min_score() >= config.accept_threshold) return ReportAction::kAccept;
  return attempts >= config.max_attempts ? ReportAction::kGiveUp : ReportAction::kRefine;
}

}  // namespace urbangen::agent
