#include <algorithm>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/furnish/furnish.hpp"
#include "urbangen/mesh/io.hpp"

namespace urbangen::furnish {

using nlohmann::json;

namespace {

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::kStreetLamp, "street_lamp"}, {Category::kTrafficSign, "traffic_sign"},
    {Category::kTrafficLight, "traffic_light"}, {Category::kUtilityPole, "utility_pole"},
    {Category::kBench, "bench"},            {Category::kTrashBin, "trash_bin"},
    {Category::kTree, "tree"},              {Category::kBush, "bush"},
    {Category::kVehicle, "vehicle"},        {Category::kPedestrian, "pedestrian"},
};

constexpr Category kCategories[] = {Category::kStreetLamp, Category::kTrafficSign, Category::kTrafficLight,
                                    Category::kUtilityPole, Category::kBench,      Category::kTrashBin,
                                    Category::kTree,        Category::kBush,       Category::kVehicle,
                                    Category::kPedestrian};

mesh::Mesh box(double cx, double cy, double sx, double sy, double z0, double z1) {
  const std::vector<Vec2> ring = {{cx - sx / 2, cy - sy / 2}, {cx + sx / 2, cy - sy / 2}, {cx + sx / 2, cy + sy / 2},
                                  {cx - sx / 2, cy + sy / 2}};
  return mesh::extrude_ring(ring, z0, z1);
}

mesh::Mesh disc(double r, double z0, double z1, int sides = 8) {
  std::vector<Vec2> ring;
  for (int i = 0; i < sides; ++i) {
    const double a = 2 * kPi * i / sides;
    ring.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return mesh::extrude_ring(ring, z0, z1);
}

mesh::Mesh combine(std::vector<mesh::Mesh> parts, Rgb color) {
  auto m = mesh::merge(parts);
  m.color = color;
  return m;
}

// Normalizes a loaded mesh: base centred on the origin, height = nominal.
mesh::Mesh normalized(const mesh::Mesh& m, double nominal) {
  const auto b = mesh::bounds(m);
  const double h = b.max.z - b.min.z;
  if (!(h > 0)) throw Error(ErrorCode::kConfig, "library mesh has no height");
  const double s = nominal / h;
  const Vec3 c{(b.min.x + b.max.x) / 2, (b.min.y + b.max.y) / 2, b.min.z};
  mesh::Mesh out = mesh::transformed(m, 1.0, 0.0, {-c.x, -c.y, -c.z});
  return mesh::transformed(out, s, 0.0, {});
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "?";
}

Category category_from_string(std::string_view name) {
  for (const auto& [cat, n] : kCategoryNames) {
    if (n == name) return cat;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown furniture category '{}'", name));
}

std::span<const Category> all_categories() { return kCategories; }

AssetLibrary AssetLibrary::builtin() {
  AssetLibrary lib;
  auto add = [&](Category c, mesh::Mesh m) {
    const double h = mesh::bounds(m).max.z;
    lib.add({c, std::string(to_string(c)), std::make_shared<const mesh::Mesh>(std::move(m)), h});
  };
  add(Category::kStreetLamp, combine({box(0, 0, 0.16, 0.16, 0, 6.0), box(0.5, 0, 1.0, 0.25, 5.85, 6.1)}, {70, 72, 76}));
  add(Category::kTrafficSign, combine({box(0, 0, 0.08, 0.08, 0, 2.2), box(0, 0, 0.7, 0.05, 2.2, 2.9)}, {200, 40, 40}));
  add(Category::kTrafficLight, combine({box(0, 0, 0.14, 0.14, 0, 3.0), box(0, 0, 0.35, 0.3, 3.0, 4.0)}, {40, 40, 40}));
  add(Category::kUtilityPole, combine({box(0, 0, 0.3, 0.3, 0, 9.0), box(0, 0, 1.6, 0.12, 8.4, 8.55)}, {110, 85, 60}));
  add(Category::kBench, combine({box(0, 0, 1.8, 0.5, 0.0, 0.45), box(0, 0.2, 1.8, 0.08, 0.45, 0.9)}, {120, 80, 45}));
  add(Category::kTrashBin, combine({disc(0.3, 0, 0.95)}, {60, 90, 60}));
  add(Category::kTree, combine({box(0, 0, 0.3, 0.3, 0, 2.5), disc(1.8, 2.5, 7.0)}, {60, 120, 50}));
  add(Category::kBush, combine({disc(0.7, 0, 1.0)}, {70, 130, 60}));
  add(Category::kVehicle, combine({box(0, 0, 4.5, 1.8, 0.2, 1.0), box(-0.2, 0, 2.4, 1.6, 1.0, 1.5),
                                   box(1.4, 0.75, 0.6, 0.25, 0, 0.2), box(1.4, -0.75, 0.6, 0.25, 0, 0.2),
                                   box(-1.4, 0.75, 0.6, 0.25, 0, 0.2), box(-1.4, -0.75, 0.6, 0.25, 0, 0.2)},
                                  {150, 30, 35}));
  add(Category::kPedestrian, combine({box(0, 0, 0.45, 0.28, 0, 1.75)}, {50, 60, 110}));
  return lib;
}

AssetLibrary AssetLibrary::load(const std::filesystem::path& dir) {
  const auto index_path = dir / "index.json";
  json index;
  try {
    index = json::parse(read_file_text(index_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", index_path.string(), e.what()));
  }
  AssetLibrary lib;
  try {
    for (const auto& e : index.at("entries")) {
      const Category c = category_from_string(e.at("category").get<std::string>());
      const auto file = e.at("file").get<std::string>();
      const double nominal = e.at("nominal_height").get<double>();
      if (!(nominal > 0)) throw Error(ErrorCode::kConfig, "nominal_height must be positive for " + file);
      const auto path = dir / file;
      mesh::Mesh m;
      if (path.extension() == ".glb") {
        auto nodes = mesh::read_glb(path);
        std::vector<mesh::Mesh> parts;
        for (auto& n : nodes) parts.push_back(std::move(n.mesh));
        m = mesh::merge(parts);
      } else {
        m = mesh::import_obj(path);
      }
      if (m.empty()) throw Error(ErrorCode::kConfig, "library mesh " + file + " is empty");
      lib.add({c, file, std::make_shared<const mesh::Mesh>(normalized(m, nominal)), nominal});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", index_path.string(), e.what()));
  }
  return lib;
}

void AssetLibrary::add(AssetLibraryEntry entry) {
  if (!entry.mesh || entry.mesh->empty()) throw Error(ErrorCode::kConfig, "library entry without a mesh");
  if (!(entry.nominal_height > 0)) throw Error(ErrorCode::kConfig, "library entry needs a positive nominal height");
  entries_[entry.category] = std::move(entry);
}

const AssetLibraryEntry& AssetLibrary::entry(Category c) const {
  auto it = entries_.find(c);
  if (it == entries_.end()) throw Error(ErrorCode::kConfig, fmt::format("asset library has no '{}' entry", to_string(c)));
  return it->second;
}

std::vector<Category> AssetLibrary::categories() const {
  std::vector<Category> out;
  for (const auto& [c, e] : entries_) out.push_back(c);
  return out;
}

}  // namespace urbangen::furnish
