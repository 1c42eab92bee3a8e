#include "urbangen/evalkit/judge.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "urbangen/common/assets.hpp"
#include "urbangen/common/error.hpp"

namespace urbangen::evalkit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string ask(tools::Toolbox& toolbox, std::vector<tools::Part> parts) {
  tools::ToolRequest req;
  req.tool = tools::ToolKind::kJudge;
  req.parts = std::move(parts);
  req.params = {{"temperature", 0.0}};
  return toolbox.call(std::move(req)).text;
}

}  // namespace

JudgeRangeError::JudgeRangeError(int value)
    : Error(ErrorCode::kProtocol, fmt::format("judge score {} is outside 0..10", value)), value_(value) {}

int parse_pointwise(const std::string& response) {
  const auto t = trim(response);
  if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw Error(ErrorCode::kProtocol, fmt::format("judge answer '{}' is not a bare integer", response));
  const int v = std::stoi(t);
  if (v > 10) throw JudgeRangeError(v);
  return v;
}

int pointwise_judge(const RgbImage& image, tools::Toolbox& toolbox) {
  return parse_pointwise(ask(toolbox, {tools::Part::make_image(image),
                                       tools::Part::make_text(std::string(assets::get("prompts/judge_pointwise.txt")))}));
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::kA: return "A";
    case Winner::kB: return "B";
    case Winner::kSplit: return "split";
  }
  return "split";
}

double JudgeVerdict::score() const {
  switch (winner) {
    case Winner::kA: return 1.0;
    case Winner::kB: return 0.0;
    case Winner::kSplit: return 0.5;
  }
  return 0.5;
}

bool parse_pairwise_first(const std::string& response) {
  const auto t = trim(response);
  if (t == "FIRST") return true;
  if (t == "SECOND") return false;
  throw Error(ErrorCode::kProtocol, fmt::format("judge answer '{}' is neither FIRST nor SECOND", response));
}

JudgeVerdict pairwise_judge(const std::string& id_a, const RgbImage& a, const std::string& id_b, const RgbImage& b,
                            tools::Toolbox& toolbox) {
  const std::string prompt(assets::get("prompts/judge_pairwise.txt"));
  JudgeVerdict v;
  v.a = id_a;
  v.b = id_b;
  v.calls[0] = ask(toolbox, {tools::Part::make_text(prompt), tools::Part::make_image(a), tools::Part::make_image(b)});
  v.calls[1] = ask(toolbox, {tools::Part::make_text(prompt), tools::Part::make_image(b), tools::Part::make_image(a)});
  const bool a_first = parse_pairwise_first(v.calls[0]);
  const bool a_second = !parse_pairwise_first(v.calls[1]);
  if (a_first && a_second)
    v.winner = Winner::kA;
  else if (!a_first && !a_second)
    v.winner = Winner::kB;
  else
    v.winner = Winner::kSplit;
  return v;
}

double win_rate(std::span<const JudgeVerdict> verdicts) {
  if (verdicts.empty()) return 0.5;
  double sum = 0.0;
  for (const auto& v : verdicts) sum += v.score();
  return sum / static_cast<double>(verdicts.size());
}

nlohmann::json to_json(const JudgeVerdict& v) {
  return {{"a", v.a}, {"b", v.b}, {"calls", {v.calls[0], v.calls[1]}}, {"winner", std::string(to_string(v.winner))}};
}

}  // namespace urbangen::evalkit
