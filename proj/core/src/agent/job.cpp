#include "urbangen/agent/job.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace urbangen::agent {

using nlohmann::json;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::kPerception, "perception"}, {Stage::kImagination, "imagination"}, {Stage::kReflection, "reflection"},
    {Stage::kGen3D, "gen3d"},           {Stage::kPostProcess, "postprocess"}, {Stage::kAligned, "aligned"},
    {Stage::kDone, "done"},             {Stage::kFailed, "failed"},
};

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "?";
}

Stage stage_from_string(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  throw Error(ErrorCode::kParse, fmt::format("unknown stage '{}'", name));
}

bool can_transition(Stage from, Stage to) {
  if (from == Stage::kDone || from == Stage::kFailed) return false;
  if (to == Stage::kFailed) return true;
  if (from == Stage::kReflection && to == Stage::kImagination) return true;
  return static_cast<int>(to) == static_cast<int>(from) + 1;
}

int CritiqueReport::min_score() const { return *std::min_element(scores.begin(), scores.end()); }
int CritiqueReport::sum() const { return std::accumulate(scores.begin(), scores.end(), 0); }

json to_json(const CritiqueReport& r) {
  return {{"structure_sanity", r.scores[0]},
          {"texture_realism", r.scores[1]},
          {"structural_alignment", r.scores[2]},
          {"reasons", r.reasons},
          {"guidance", r.guidance}};
}

CritiqueReport critique_from_json(const json& j) {
  CritiqueReport r;
  r.scores = {j.at("structure_sanity").get<int>(), j.at("texture_realism").get<int>(),
              j.at("structural_alignment").get<int>()};
  r.reasons = j.at("reasons").get<std::array<std::string, 3>>();
  r.guidance = j.value("guidance", "");
  return r;
}

void BuildingJob::advance(Stage to) {
  if (!can_transition(stage, to)) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("job {}: illegal transition {} -> {}", building, to_string(stage), to_string(to)));
  }
  stage = to;
}

void BuildingJob::fail(Failure f) {
  advance(Stage::kFailed);
  failure = std::move(f);
}

json to_json(const BuildingJob& job) {
  json j = {{"building", job.building},
            {"stage", to_string(job.stage)},
            {"attempts", job.attempts},
            {"artifacts", job.artifacts},
            {"best_effort", job.best_effort},
            {"degraded", job.degraded}};
  if (job.best) j["best"] = to_json(*job.best);
  if (!job.best_image.empty()) j["best_image"] = job.best_image;
  if (job.failure) j["failure"] = {{"cause", job.failure->cause}, {"message", job.failure->message}};
  return j;
}

BuildingJob job_from_json(const json& j) {
  try {
    BuildingJob job;
    job.building = j.at("building").get<std::string>();
    job.stage = stage_from_string(j.at("stage").get<std::string>());
    job.attempts = j.at("attempts").get<int>();
    job.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    job.best_effort = j.value("best_effort", false);
    job.degraded = j.value("degraded", false);
    if (j.contains("best")) job.best = critique_from_json(j["best"]);
    job.best_image = j.value("best_image", "");
    if (j.contains("failure")) {
      job.failure = Failure{j["failure"].at("cause").get<std::string>(), j["failure"].at("message").get<std::string>()};
    }
    return job;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed job state: ") + e.what());
  }
}

std::vector<BuildingJob> plan(const geodata::RegionModel& region, const PipelineConfig&) {
  std::vector<BuildingJob> jobs;
  jobs.reserve(region.buildings.size());
  for (const auto& b : region.buildings) {
    BuildingJob job;
    job.building = b.id;
    jobs.push_back(std::move(job));
  }
  std::sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.building < b.building; });
  return jobs;
}

}  // namespace urbangen::agent
