#pragma once

#include <array>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "urbangen/common/error.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::evalkit {

// Parses a bare integer 0..10. Anything else throws Error(kProtocol); an
// integer outside the range throws JudgeRangeError.
int parse_pointwise(const std::string& response);

class JudgeRangeError : public Error {
 public:
  explicit JudgeRangeError(int value);
  int value() const noexcept { return value_; }

 private:
  int value_;
};

// One judge call with the pointwise prompt; temperature is forced to 0.
int pointwise_judge(const RgbImage& image, tools::Toolbox& toolbox);

enum class Winner { kA, kB, kSplit };
std::string_view to_string(Winner w);

struct JudgeVerdict {
  std::string a;
  std::string b;
  std::array<std::string, 2> calls;  // raw answers: (a, b) order, then (b, a)
  Winner winner = Winner::kSplit;

  double score() const;  // A = 1, B = 0, split = 0.5
};

// The ordered answer "FIRST"/"SECOND" (surrounding whitespace ignored).
// Throws Error(kProtocol) otherwise.
bool parse_pairwise_first(const std::string& response);

// Two judge calls with the candidates presented in opposite orders. A wins
// only when preferred in both, likewise B; disagreement is a split.
JudgeVerdict pairwise_judge(const std::string& id_a, const RgbImage& a, const std::string& id_b, const RgbImage& b,
                            tools::Toolbox& toolbox);

// Mean score of A over all verdicts; 0.5 for an empty list.
double win_rate(std::span<const JudgeVerdict> verdicts);

nlohmann::json to_json(const JudgeVerdict& v);

}  // namespace urbangen::evalkit
