#include "urbangen/common/assets.hpp"

#include "urbangen/common/error.hpp"

namespace urbangen::assets {

std::string_view get(const std::string& name) {
  const auto& t = table();
  auto it = t.find(name);
  if (it == t.end()) throw Error(ErrorCode::kIo, "no embedded asset named " + name);
  return it->second;
}

}  // namespace urbangen::assets
