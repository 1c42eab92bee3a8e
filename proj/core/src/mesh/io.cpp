#include "urbangen/mesh/io.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"

namespace urbangen::mesh {

using nlohmann::json;

std::string to_obj(const Mesh& mesh, const std::string& mtl_name) {
  std::string out = "# urbangen mesh\n";
  const bool uv = !mesh.uvs.empty();
  if (!mtl_name.empty()) out += fmt::format("mtllib {}\nusemtl material0\n", mtl_name);
  for (const auto& v : mesh.vertices) out += fmt::format("v {} {} {}\n", v.x, v.y, v.z);
  // OBJ texture coordinates grow upwards.
  for (const auto& t : mesh.uvs) out += fmt::format("vt {} {}\n", t.x, 1.0 - t.y);
  for (const auto& f : mesh.faces) {
    if (uv) {
      out += fmt::format("f {0}/{0} {1}/{1} {2}/{2}\n", f[0] + 1, f[1] + 1, f[2] + 1);
    } else {
      out += fmt::format("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
    }
  }
  return out;
}

void export_obj(const Mesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  if (mesh.texture && !mesh.uvs.empty()) {
    const auto stem = path.stem().string();
    const auto dir = path.parent_path();
    write_file_atomic(dir / (stem + ".mtl"),
                      fmt::format("newmtl material0\nKd {} {} {}\nmap_Kd {}.png\n", mesh.color[0] / 255.0,
                                  mesh.color[1] / 255.0, mesh.color[2] / 255.0, stem));
    write_png(dir / (stem + ".png"), *mesh.texture);
    write_file_atomic(path, to_obj(mesh, stem + ".mtl"));
  } else {
    write_file_atomic(path, to_obj(mesh));
  }
}

namespace {

long parse_index(const std::string& token, std::size_t count, std::size_t line_no) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || v == 0) {
    throw ParseError(fmt::format("bad OBJ index '{}' on line {}", token, line_no), 0);
  }
  const long idx = v > 0 ? v - 1 : static_cast<long>(count) + v;
  if (idx < 0 || static_cast<std::size_t>(idx) >= count) {
    throw ParseError(fmt::format("OBJ index {} out of range on line {}", v, line_no), 0);
  }
  return idx;
}

}  // namespace

Mesh parse_obj(const std::string& text) {
  std::vector<Vec3> positions;
  std::vector<Vec2> texcoords;
  struct Corner {
    long v;
    long t;
  };
  std::vector<std::array<Corner, 3>> tris;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) throw ParseError(fmt::format("bad vertex on line {}", line_no), 0);
      positions.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ls >> t.x >> t.y)) throw ParseError(fmt::format("bad texcoord on line {}", line_no), 0);
      texcoords.push_back({t.x, 1.0 - t.y});
    } else if (tag == "f") {
      std::vector<Corner> poly;
      std::string tok;
      while (ls >> tok) {
        Corner c{-1, -1};
        const auto s1 = tok.find('/');
        c.v = parse_index(tok.substr(0, s1), positions.size(), line_no);
        if (s1 != std::string::npos) {
          const auto s2 = tok.find('/', s1 + 1);
          const auto t = tok.substr(s1 + 1, s2 == std::string::npos ? std::string::npos : s2 - s1 - 1);
          if (!t.empty()) c.t = parse_index(t, texcoords.size(), line_no);
        }
        poly.push_back(c);
      }
      if (poly.size() < 3) throw ParseError(fmt::format("face with fewer than 3 corners on line {}", line_no), 0);
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }

  Mesh mesh;
  const bool with_uv =
      !tris.empty() && std::all_of(tris.begin(), tris.end(), [](const auto& t) {
        return t[0].t >= 0 && t[1].t >= 0 && t[2].t >= 0;
      });
  if (!with_uv) {
    mesh.vertices = positions;
    for (const auto& t : tris) {
      Face f{static_cast<std::uint32_t>(t[0].v), static_cast<std::uint32_t>(t[1].v), static_cast<std::uint32_t>(t[2].v)};
      if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) mesh.faces.push_back(f);
    }
    return mesh;
  }
  std::map<std::pair<long, long>, std::uint32_t> corner_index;
  for (const auto& t : tris) {
    Face f{};
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] = corner_index.try_emplace({t[k].v, t[k].t}, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) {
        mesh.vertices.push_back(positions[static_cast<std::size_t>(t[k].v)]);
        mesh.uvs.push_back(texcoords[static_cast<std::size_t>(t[k].t)]);
      }
      f[k] = it->second;
    }
    if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) mesh.faces.push_back(f);
  }
  return mesh;
}

Mesh import_obj(const std::filesystem::path& path) {
  const std::string text = read_file_text(path);
  Mesh mesh = parse_obj(text);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("mtllib ", 0) != 0) continue;
    const auto mtl_path = path.parent_path() / line.substr(7);
    if (!std::filesystem::exists(mtl_path)) break;
    std::istringstream mtl(read_file_text(mtl_path));
    std::string ml;
    while (std::getline(mtl, ml)) {
      std::istringstream ls(ml);
      std::string tag;
      ls >> tag;
      if (tag == "Kd") {
        double r = 0, g = 0, b = 0;
        if (ls >> r >> g >> b) {
          mesh.color = {static_cast<std::uint8_t>(std::lround(r * 255)), static_cast<std::uint8_t>(std::lround(g * 255)),
                        static_cast<std::uint8_t>(std::lround(b * 255))};
        }
      } else if (tag == "map_Kd") {
        std::string name;
        ls >> name;
        if (!mesh.uvs.empty()) mesh.texture = read_png(path.parent_path() / name);
      }
    }
    break;
  }
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------------------
// glTF

namespace {

constexpr std::uint32_t kGlbMagic = 0x46546C67;  // "glTF"
constexpr std::uint32_t kChunkJson = 0x4E4F534A;
constexpr std::uint32_t kChunkBin = 0x004E4942;
constexpr int kFloat = 5126;
constexpr int kUnsignedInt = 5125;
constexpr int kArrayBuffer = 34962;
constexpr int kElementArrayBuffer = 34963;

Vec3 to_gltf(const Vec3& p) { return {p.x, p.z, -p.y}; }
Vec3 from_gltf(const Vec3& p) { return {p.x, -p.z, p.y}; }

class BinWriter {
 public:
  std::vector<std::uint8_t> data;
  json views = json::array();

  int add_view(const void* bytes, std::size_t size, int target) {
    while (data.size() % 4 != 0) data.push_back(0);
    json v = {{"buffer", 0}, {"byteOffset", data.size()}, {"byteLength", size}};
    if (target != 0) v["target"] = target;
    const auto* p = static_cast<const std::uint8_t*>(bytes);
    data.insert(data.end(), p, p + size);
    views.push_back(v);
    return static_cast<int>(views.size()) - 1;
  }
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 4 > b.size()) throw ParseError("truncated GLB", at);
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> export_glb(std::span<const SceneNode> nodes) {
  BinWriter bin;
  json accessors = json::array(), meshes = json::array(), materials = json::array();
  json textures = json::array(), images = json::array(), samplers = json::array(), gnodes = json::array();
  std::map<const Mesh*, int> mesh_index;

  for (const auto& node : nodes) {
    json jn = {{"name", node.name}};
    if (node.mesh && !node.mesh->empty()) {
      const Mesh& m = *node.mesh;
      auto it = mesh_index.find(&m);
      if (it == mesh_index.end()) {
        m.validate();
        std::vector<float> pos;
        pos.reserve(m.vertices.size() * 3);
        std::array<float, 3> lo{1e30f, 1e30f, 1e30f}, hi{-1e30f, -1e30f, -1e30f};
        for (const auto& v : m.vertices) {
          const Vec3 g = to_gltf(v);
          const std::array<float, 3> f{static_cast<float>(g.x), static_cast<float>(g.y), static_cast<float>(g.z)};
          for (int k = 0; k < 3; ++k) lo[k] = std::min(lo[k], f[k]), hi[k] = std::max(hi[k], f[k]);
          pos.insert(pos.end(), f.begin(), f.end());
        }
        const int pv = bin.add_view(pos.data(), pos.size() * sizeof(float), kArrayBuffer);
        accessors.push_back({{"bufferView", pv},
                             {"componentType", kFloat},
                             {"count", m.vertices.size()},
                             {"type", "VEC3"},
                             {"min", lo},
                             {"max", hi}});
        json attributes = {{"POSITION", accessors.size() - 1}};

        std::vector<std::uint32_t> idx;
        idx.reserve(m.faces.size() * 3);
        for (const auto& f : m.faces) idx.insert(idx.end(), f.begin(), f.end());
        const int iv = bin.add_view(idx.data(), idx.size() * sizeof(std::uint32_t), kElementArrayBuffer);
        accessors.push_back({{"bufferView", iv}, {"componentType", kUnsignedInt}, {"count", idx.size()}, {"type", "SCALAR"}});
        const auto index_accessor = accessors.size() - 1;

        json pbr = {{"baseColorFactor", {m.color[0] / 255.0, m.color[1] / 255.0, m.color[2] / 255.0, 1.0}},
                    {"metallicFactor", 0.0},
                    {"roughnessFactor", 1.0}};
        if (!m.uvs.empty()) {
          std::vector<float> uv;
          uv.reserve(m.uvs.size() * 2);
          for (const auto& t : m.uvs) uv.push_back(static_cast<float>(t.x)), uv.push_back(static_cast<float>(t.y));
          const int tv = bin.add_view(uv.data(), uv.size() * sizeof(float), kArrayBuffer);
          accessors.push_back({{"bufferView", tv}, {"componentType", kFloat}, {"count", m.uvs.size()}, {"type", "VEC2"}});
          attributes["TEXCOORD_0"] = accessors.size() - 1;
          if (m.texture && !m.texture->empty()) {
            const auto png = encode_png(*m.texture);
            const int imv = bin.add_view(png.data(), png.size(), 0);
            images.push_back({{"bufferView", imv}, {"mimeType", "image/png"}});
            if (samplers.empty()) samplers.push_back({{"magFilter", 9728}, {"minFilter", 9728}});
            textures.push_back({{"sampler", 0}, {"source", images.size() - 1}});
            pbr["baseColorTexture"] = {{"index", textures.size() - 1}};
            pbr["baseColorFactor"] = {1.0, 1.0, 1.0, 1.0};
          }
        }
        materials.push_back({{"pbrMetallicRoughness", pbr}, {"doubleSided", true}});
        meshes.push_back(
            {{"primitives",
              {{{"attributes", attributes}, {"indices", index_accessor}, {"material", materials.size() - 1}, {"mode", 4}}}}});
        it = mesh_index.emplace(&m, static_cast<int>(meshes.size()) - 1).first;
      }
      jn["mesh"] = it->second;
    }
    const Vec3 t = to_gltf(node.translation);
    jn["translation"] = {t.x, t.y, t.z};
    jn["rotation"] = {0.0, std::sin(node.yaw / 2), 0.0, std::cos(node.yaw / 2)};
    jn["scale"] = {node.scale, node.scale, node.scale};
    gnodes.push_back(jn);
  }

  json doc = {{"asset", {{"version", "2.0"}, {"generator", "urbangen"}}}, {"scene", 0}};
  json scene = json::object();
  if (!gnodes.empty()) {
    json ids = json::array();
    for (std::size_t i = 0; i < gnodes.size(); ++i) ids.push_back(i);
    scene["nodes"] = ids;
    doc["nodes"] = gnodes;
  }
  doc["scenes"] = json::array({scene});
  if (!meshes.empty()) {
    doc["meshes"] = meshes;
    doc["materials"] = materials;
    doc["accessors"] = accessors;
  }
  if (!images.empty()) {
    doc["images"] = images;
    doc["textures"] = textures;
    doc["samplers"] = samplers;
  }
  while (bin.data.size() % 4 != 0) bin.data.push_back(0);
  if (!bin.data.empty()) {
    doc["bufferViews"] = bin.views;
    doc["buffers"] = json::array({{{"byteLength", bin.data.size()}}});
  }

  std::string text = doc.dump();
  while (text.size() % 4 != 0) text.push_back(' ');
  std::vector<std::uint8_t> out;
  const std::size_t total = 12 + 8 + text.size() + (bin.data.empty() ? 0 : 8 + bin.data.size());
  out.reserve(total);
  put_u32(out, kGlbMagic);
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(total));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  put_u32(out, kChunkJson);
  out.insert(out.end(), text.begin(), text.end());
  if (!bin.data.empty()) {
    put_u32(out, static_cast<std::uint32_t>(bin.data.size()));
    put_u32(out, kChunkBin);
    out.insert(out.end(), bin.data.begin(), bin.data.end());
  }
  return out;
}

void write_glb(const std::filesystem::path& path, std::span<const SceneNode> nodes) {
  write_file_atomic(path, export_glb(nodes));
}

namespace {

struct GlbView {
  const json& doc;
  std::span<const std::uint8_t> bin;

  std::span<const std::uint8_t> view_bytes(int index) const {
    const auto& v = doc.at("bufferViews").at(index);
    const std::size_t off = v.value("byteOffset", 0), len = v.at("byteLength").get<std::size_t>();
    if (off + len > bin.size()) throw ParseError("bufferView exceeds BIN chunk", off);
    return bin.subspan(off, len);
  }

  template <typename T>
  std::vector<T> read_accessor(int index, int components) const {
    const auto& a = doc.at("accessors").at(index);
    const auto count = a.at("count").get<std::size_t>();
    const int type = a.at("componentType").get<int>();
    const auto bytes = view_bytes(a.at("bufferView").get<int>());
    const std::size_t off = a.value("byteOffset", 0);
    std::vector<T> out(count * static_cast<std::size_t>(components));
    auto read_as = [&](auto tag) {
      using C = decltype(tag);
      if (off + out.size() * sizeof(C) > bytes.size()) throw ParseError("accessor exceeds bufferView", off);
      for (std::size_t i = 0; i < out.size(); ++i) {
        C c;
        std::memcpy(&c, bytes.data() + off + i * sizeof(C), sizeof(C));
        out[i] = static_cast<T>(c);
      }
    };
    switch (type) {
      case kFloat: read_as(float{}); break;
      case kUnsignedInt: read_as(std::uint32_t{}); break;
      case 5123: read_as(std::uint16_t{}); break;
      case 5121: read_as(std::uint8_t{}); break;
      default: throw ParseError(fmt::format("unsupported accessor component type {}", type), 0);
    }
    return out;
  }
};

}  // namespace

std::vector<ImportedNode> import_glb(std::span<const std::uint8_t> bytes) {
  if (get_u32(bytes, 0) != kGlbMagic) throw ParseError("not a GLB file", 0);
  if (get_u32(bytes, 4) != 2) throw ParseError("unsupported GLB version", 4);
  const std::uint32_t total = get_u32(bytes, 8);
  if (total > bytes.size()) throw ParseError("GLB length exceeds data", 8);
  std::size_t at = 12;
  json doc;
  std::span<const std::uint8_t> bin;
  while (at + 8 <= total) {
    const auto len = get_u32(bytes, at), type = get_u32(bytes, at + 4);
    if (at + 8 + len > total) throw ParseError("GLB chunk exceeds file", at);
    const auto body = bytes.subspan(at + 8, len);
    if (type == kChunkJson) {
      doc = json::parse(body.begin(), body.end());
    } else if (type == kChunkBin) {
      bin = body;
    }
    at += 8 + len;
  }
  if (doc.is_null()) throw ParseError("GLB has no JSON chunk", 12);

  GlbView view{doc, bin};
  std::vector<ImportedNode> out;
  const auto& scenes = doc.value("scenes", json::array());
  const int scene = doc.value("scene", 0);
  if (scenes.empty()) return out;
  for (const auto& ni : scenes.at(scene).value("nodes", json::array())) {
    const auto& jn = doc.at("nodes").at(ni.get<int>());
    ImportedNode node;
    node.name = jn.value("name", "");
    if (jn.contains("translation")) {
      const auto t = jn["translation"].get<std::array<double, 3>>();
      node.translation = from_gltf({t[0], t[1], t[2]});
    }
    if (jn.contains("scale")) node.scale = jn["scale"].get<std::array<double, 3>>();
    if (jn.contains("rotation")) node.rotation = jn["rotation"].get<std::array<double, 4>>();
    node.yaw = 2.0 * std::atan2(node.rotation[1], node.rotation[3]);
    if (jn.contains("mesh")) {
      const auto& prim = doc.at("meshes").at(jn["mesh"].get<int>()).at("primitives").at(0);
      const auto& attrs = prim.at("attributes");
      const auto pos = view.read_accessor<double>(attrs.at("POSITION").get<int>(), 3);
      for (std::size_t i = 0; i + 2 < pos.size(); i += 3) node.mesh.vertices.push_back(from_gltf({pos[i], pos[i + 1], pos[i + 2]}));
      const auto idx = view.read_accessor<std::uint32_t>(prim.at("indices").get<int>(), 1);
      for (std::size_t i = 0; i + 2 < idx.size(); i += 3) node.mesh.faces.push_back({idx[i], idx[i + 1], idx[i + 2]});
      if (attrs.contains("TEXCOORD_0")) {
        const auto uv = view.read_accessor<double>(attrs["TEXCOORD_0"].get<int>(), 2);
        for (std::size_t i = 0; i + 1 < uv.size(); i += 2) node.mesh.uvs.push_back({uv[i], uv[i + 1]});
      }
      if (prim.contains("material")) {
        const auto& pbr = doc.at("materials").at(prim["material"].get<int>()).value("pbrMetallicRoughness", json::object());
        if (pbr.contains("baseColorFactor")) {
          const auto c = pbr["baseColorFactor"].get<std::array<double, 4>>();
          for (int k = 0; k < 3; ++k) node.mesh.color[k] = static_cast<std::uint8_t>(std::lround(std::clamp(c[k], 0.0, 1.0) * 255));
        }
        if (pbr.contains("baseColorTexture")) {
          const auto& tex = doc.at("textures").at(pbr["baseColorTexture"].at("index").get<int>());
          const auto& img = doc.at("images").at(tex.at("source").get<int>());
          const auto png = view.view_bytes(img.at("bufferView").get<int>());
          node.mesh.texture = decode_png(std::vector<std::uint8_t>(png.begin(), png.end()));
        }
      }
      node.mesh.validate();
    }
    out.push_back(std::move(node));
  }
  return out;
}

std::vector<ImportedNode> read_glb(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return import_glb(bytes);
}

}  // namespace urbangen::mesh
