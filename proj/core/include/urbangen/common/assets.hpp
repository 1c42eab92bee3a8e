#pragma once

#include <map>
#include <string>
#include <string_view>

namespace urbangen::assets {

// Files under core/assets/, compiled into the library. Keys are relative
// paths such as "prompts/judge_pairwise.txt".
const std::map<std::string, std::string_view>& table();

// Throws Error(kIo) for unknown names.
std::string_view get(const std::string& name);

}  // namespace urbangen::assets
