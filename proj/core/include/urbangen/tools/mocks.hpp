#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "urbangen/geodata/types.hpp"
#include "urbangen/tools/backend.hpp"

namespace urbangen::tools {
class Toolbox;
}

namespace urbangen::tools::mocks {

enum class Rubric { kStructureSanity = 0, kTextureRealism = 1, kStructuralAlignment = 2 };
// Identifies the rubric from the prompt text of a critic request.
Rubric rubric_of(const ToolRequest& request);

// One "building" box over the central 60% of the first image, confidence in
// [0.30, 0.95] derived from the digest, plus a low-confidence "car" box.
MockBackend::Script detector();
// Empty environment record.
MockBackend::Script env_info();
// Returns the first image of the payload unchanged.
MockBackend::Script imaginer();
// Same score on every rubric.
MockBackend::Script critic(int score = 5, std::string reason = "consistent with the references");
// Round k (0-based, per rubric) answers scores[min(k, size-1)][rubric].
MockBackend::Script critic_sequence(std::vector<std::array<int, 3>> scores);

struct ShapeOptions {
  bool ground_slab = true;  // thin plate under the asset, as image-to-3D models tend to produce
  bool fragment = true;     // tiny detached cube beside the asset
};
// Returns the building's scaffold prism, recentred on the origin, scaled to a
// unit largest dimension and turned by a whole number of degrees derived from
// the building id. Requests without an asset tag get a unit box.
MockBackend::Script shape_from_region(std::shared_ptr<const geodata::RegionModel> region, ShapeOptions options = {});
// Planar top-down UVs with the first image of the payload as texture.
MockBackend::Script texture_painter();
// Pairwise prompts get `pairwise_answer`; pointwise prompts get `score`.
MockBackend::Script judge(std::string pairwise_answer = "FIRST", int score = 7);

// Installs a mock backend for every tool.
void install(Toolbox& toolbox, std::shared_ptr<const geodata::RegionModel> region);

}  // namespace urbangen::tools::mocks
