#include "urbangen/tools/mocks.hpp"

#include <algorithm>
#include <mutex>

#include "urbangen/common/assets.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/mesh/scaffold.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::tools::mocks {

using nlohmann::json;

namespace {

const RgbImage& first_image_or_throw(const ToolRequest& request, std::vector<RgbImage>& holder) {
  holder = request.images();
  if (holder.empty()) throw Error(ErrorCode::kPrecondition, std::string(to_string(request.tool)) + " mock needs an image part");
  return holder.front();
}

bool starts_with(const std::string& text, const std::string& prefix) { return text.compare(0, prefix.size(), prefix) == 0; }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

mesh::Mesh unit_box() {
  const std::vector<Vec2> ring = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  return mesh::extrude_ring(ring, 0.0, 1.0);
}

}  // namespace

Rubric rubric_of(const ToolRequest& request) {
  const std::string text = request.text();
  static const std::pair<const char*, Rubric> kTemplates[] = {
      {"prompts/critic_structure_sanity.txt", Rubric::kStructureSanity},
      {"prompts/critic_texture_realism.txt", Rubric::kTextureRealism},
      {"prompts/critic_structural_alignment.txt", Rubric::kStructuralAlignment},
  };
  for (const auto& [name, rubric] : kTemplates) {
    if (starts_with(text, first_line(std::string(assets::get(name))))) return rubric;
  }
  throw Error(ErrorCode::kPrecondition, "critic request does not start with a known rubric prompt");
}

MockBackend::Script detector() {
  return [](const ToolRequest& request, const CacheKey& key, MeshStore&) {
    std::vector<RgbImage> holder;
    const RgbImage& img = first_image_or_throw(request, holder);
    const double conf = 0.30 + 0.65 * static_cast<double>(hash64(key.digest) % 1000) / 999.0;
    const int bw = std::max(1, img.width() * 6 / 10), bh = std::max(1, img.height() * 6 / 10);
    const int bx = (img.width() - bw) / 2, by = (img.height() - bh) / 2;
    json dets = json::array();
    dets.push_back({{"label", "building"}, {"confidence", conf}, {"bbox", {bx, by, bw, bh}}});
    dets.push_back({{"label", "car"}, {"confidence", 0.2}, {"bbox", {0, 0, std::max(1, img.width() / 4), std::max(1, img.height() / 4)}}});
    return ToolResponse::make_record({{"detections", dets}});
  };
}

MockBackend::Script env_info() {
  return [](const ToolRequest&, const CacheKey&, MeshStore&) {
    return ToolResponse::make_record({{"objects", json::array()}, {"trees", json::array()}, {"adjacency", json::array()}});
  };
}

MockBackend::Script imaginer() {
  return [](const ToolRequest& request, const CacheKey&, MeshStore&) {
    for (const auto& p : request.parts) {
      if (p.kind == Part::Kind::kImage) {
        ToolResponse r;
        r.type = Modality::kImage;
        r.image_png = p.bytes;
        return r;
      }
    }
    throw Error(ErrorCode::kPrecondition, "imaginer mock needs an image part");
  };
}

MockBackend::Script critic(int score, std::string reason) {
  return [score, reason](const ToolRequest&, const CacheKey&, MeshStore&) {
    return ToolResponse::make_record({{"score", score}, {"reason", reason}});
  };
}

MockBackend::Script critic_sequence(std::vector<std::array<int, 3>> scores) {
  if (scores.empty()) throw Error(ErrorCode::kPrecondition, "critic sequence is empty");
  struct State {
    std::mutex mutex;
    std::array<std::size_t, 3> rounds{0, 0, 0};
  };
  auto state = std::make_shared<State>();
  return [scores = std::move(scores), state](const ToolRequest& request, const CacheKey&, MeshStore&) {
    const auto r = static_cast<std::size_t>(rubric_of(request));
    std::size_t k;
    {
      std::lock_guard lock(state->mutex);
      k = state->rounds[r]++;
    }
    const auto& row = scores[std::min(k, scores.size() - 1)];
    return ToolResponse::make_record({{"score", row[r]}, {"reason", "scripted round " + std::to_string(k + 1)}});
  };
}

MockBackend::Script shape_from_region(std::shared_ptr<const geodata::RegionModel> region, ShapeOptions options) {
  return [region, options](const ToolRequest& request, const CacheKey&, MeshStore& store) {
    const auto tag = find_asset_tag(request);
    const geodata::BuildingFootprint* fp = (tag && region) ? region->find_building(*tag) : nullptr;
    mesh::Mesh m;
    if (fp) {
      const Vec2 c = polygon::centroid(fp->polygon);
      m = mesh::extrude_prism(*fp);
      const auto b = mesh::bounds(m);
      const Vec3 e = b.extent();
      const double s = 1.0 / std::max({e.x, e.y, e.z});
      const double yaw = deg2rad(static_cast<double>(hash64(fp->id) % 360));
      m = mesh::transformed(mesh::transformed(m, 1.0, 0.0, {-c.x, -c.y, 0.0}), s, yaw, {});
    } else {
      m = unit_box();
    }
    std::vector<mesh::Mesh> parts{m};
    const auto b = mesh::bounds(m);
    const double h = b.max.z - b.min.z;
    const double half = std::max({std::abs(b.min.x), std::abs(b.max.x), std::abs(b.min.y), std::abs(b.max.y)}) * 1.25;
    if (options.ground_slab) {
      const std::vector<Vec2> sq = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
      parts.push_back(mesh::extrude_ring(sq, b.min.z - 0.005 * h, b.min.z));
    }
    if (options.fragment) {
      const double f = std::cbrt(0.002 * b.volume());
      const double x0 = half + 2 * f;
      const std::vector<Vec2> sq = {{x0, 0}, {x0 + f, 0}, {x0 + f, f}, {x0, f}};
      parts.push_back(mesh::extrude_ring(sq, b.min.z, b.min.z + f));
    }
    return ToolResponse::make_mesh(store.put(mesh::merge(parts)));
  };
}

MockBackend::Script texture_painter() {
  return [](const ToolRequest& request, const CacheKey&, MeshStore& store) {
    const Part* mesh_part = nullptr;
    for (const auto& p : request.parts) {
      if (p.kind == Part::Kind::kMesh) mesh_part = &p;
    }
    if (!mesh_part) throw Error(ErrorCode::kPrecondition, "texture painter mock needs a mesh part");
    std::vector<RgbImage> holder;
    const RgbImage& img = first_image_or_throw(request, holder);
    mesh::Mesh m = store.get(mesh_part->mesh);
    const auto b = mesh::bounds(m);
    const double wx = std::max(b.max.x - b.min.x, 1e-9), wy = std::max(b.max.y - b.min.y, 1e-9);
    m.uvs.clear();
    for (const auto& v : m.vertices) m.uvs.push_back({(v.x - b.min.x) / wx, (b.max.y - v.y) / wy});
    m.texture = img;
    m.color = {255, 255, 255};
    return ToolResponse::make_mesh(store.put(m));
  };
}

MockBackend::Script judge(std::string pairwise_answer, int score) {
  const std::string pairwise_head = first_line(std::string(assets::get("prompts/judge_pairwise.txt")));
  return [pairwise_answer, score, pairwise_head](const ToolRequest& request, const CacheKey&, MeshStore&) {
    if (starts_with(request.text(), pairwise_head)) return ToolResponse::make_text(pairwise_answer);
    return ToolResponse::make_text(std::to_string(score));
  };
}

void install(Toolbox& toolbox, std::shared_ptr<const geodata::RegionModel> region) {
  toolbox.set_backend(ToolKind::kDetector, std::make_shared<MockBackend>(detector()));
  toolbox.set_backend(ToolKind::kEnvInfoExtractor, std::make_shared<MockBackend>(env_info()));
  toolbox.set_backend(ToolKind::kImaginer, std::make_shared<MockBackend>(imaginer()));
  toolbox.set_backend(ToolKind::kCritic, std::make_shared<MockBackend>(critic()));
  toolbox.set_backend(ToolKind::kShapeGenerator, std::make_shared<MockBackend>(shape_from_region(std::move(region))));
  toolbox.set_backend(ToolKind::kTexturePainter, std::make_shared<MockBackend>(texture_painter()));
  toolbox.set_backend(ToolKind::kJudge, std::make_shared<MockBackend>(judge()));
}

}  // namespace urbangen::tools::mocks
