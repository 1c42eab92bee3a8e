#include "urbangen/geodata/osm.hpp"

#include <expat.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "urbangen/common/error.hpp"

namespace urbangen::geodata {

using json = nlohmann::json;

DocumentFormat detect_format(std::string_view bytes) {
  for (char c : bytes) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    return c == '{' ? DocumentFormat::kJson : DocumentFormat::kXml;
  }
  return DocumentFormat::kXml;
}

void OsmEntities::reindex() {
  node_index_.clear();
  way_index_.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) node_index_[nodes[i].id] = i;
  for (std::size_t i = 0; i < ways.size(); ++i) way_index_[ways[i].id] = i;
}

const OsmNode* OsmEntities::node(std::int64_t id) const {
  auto it = node_index_.find(id);
  return it == node_index_.end() ? nullptr : &nodes[it->second];
}

const OsmWay* OsmEntities::way(std::int64_t id) const {
  auto it = way_index_.find(id);
  return it == way_index_.end() ? nullptr : &ways[it->second];
}

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; });
}

std::optional<std::int64_t> parse_i64(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_f64(std::string_view s) {
  // from_chars for double is missing in GCC 11's libstdc++; strtod is
  // locale-sensitive but the library never changes LC_NUMERIC.
  if (s.empty()) return std::nullopt;
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Drops ways whose node references cannot be resolved.
void drop_dangling(OsmEntities& e, Diagnostics& diagnostics) {
  e.reindex();
  std::vector<OsmWay> kept;
  kept.reserve(e.ways.size());
  for (auto& way : e.ways) {
    auto missing = std::find_if(way.node_refs.begin(), way.node_refs.end(),
                                [&](std::int64_t ref) { return e.node(ref) == nullptr; });
    if (missing != way.node_refs.end()) {
      diagnostics.warn("dangling_node", fmt::format("w{}", way.id),
                       fmt::format("way {} references missing node {}; way dropped", way.id, *missing));
      continue;
    }
    kept.push_back(std::move(way));
  }
  e.ways = std::move(kept);
  e.reindex();
}

// ---- XML -------------------------------------------------------------------

struct XmlState {
  XML_Parser parser = nullptr;
  OsmEntities entities;
  enum class Open { kNone, kNode, kWay, kRelation } open = Open::kNone;
  std::optional<ParseError> error;

  std::size_t offset() const { return static_cast<std::size_t>(XML_GetCurrentByteIndex(parser)); }

  void fail(const std::string& message) {
    if (!error) error.emplace(message, offset());
    XML_StopParser(parser, XML_FALSE);
  }
};

const char* find_attr(const XML_Char** attrs, const char* name) {
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    if (std::strcmp(attrs[i], name) == 0) return attrs[i + 1];
  }
  return nullptr;
}

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* st = static_cast<XmlState*>(user);
  if (st->error) return;
  auto need_id = [&](const char* what) -> std::optional<std::int64_t> {
    const char* raw = find_attr(attrs, "id");
    auto id = raw ? parse_i64(raw) : std::nullopt;
    if (!id) st->fail(fmt::format("<{}> without a valid id", what));
    return id;
  };
  if (std::strcmp(name, "node") == 0) {
    auto id = need_id("node");
    if (!id) return;
    const char* lat = find_attr(attrs, "lat");
    const char* lon = find_attr(attrs, "lon");
    auto la = lat ? parse_f64(lat) : std::nullopt;
    auto lo = lon ? parse_f64(lon) : std::nullopt;
    if (!la || !lo) return st->fail(fmt::format("node {} has invalid lat/lon", *id));
    OsmNode n{*id, {*la, *lo}, {}};
    if (!n.coord.valid()) return st->fail(fmt::format("node {} coordinates out of range", *id));
    st->entities.nodes.push_back(std::move(n));
    st->open = XmlState::Open::kNode;
  } else if (std::strcmp(name, "way") == 0) {
    auto id = need_id("way");
    if (!id) return;
    st->entities.ways.push_back({*id, {}, {}});
    st->open = XmlState::Open::kWay;
  } else if (std::strcmp(name, "relation") == 0) {
    auto id = need_id("relation");
    if (!id) return;
    st->entities.relations.push_back({*id, {}, {}});
    st->open = XmlState::Open::kRelation;
  } else if (std::strcmp(name, "nd") == 0) {
    if (st->open != XmlState::Open::kWay) return st->fail("<nd> outside of <way>");
    const char* raw = find_attr(attrs, "ref");
    auto ref = raw ? parse_i64(raw) : std::nullopt;
    if (!ref) return st->fail("<nd> without a valid ref");
    st->entities.ways.back().node_refs.push_back(*ref);
  } else if (std::strcmp(name, "member") == 0) {
    if (st->open != XmlState::Open::kRelation) return st->fail("<member> outside of <relation>");
    const char* type = find_attr(attrs, "type");
    const char* raw = find_attr(attrs, "ref");
    const char* role = find_attr(attrs, "role");
    auto ref = raw ? parse_i64(raw) : std::nullopt;
    if (!type || !ref) return st->fail("<member> without type/ref");
    st->entities.relations.back().members.push_back({type, *ref, role ? role : ""});
  } else if (std::strcmp(name, "tag") == 0) {
    const char* k = find_attr(attrs, "k");
    const char* v = find_attr(attrs, "v");
    if (!k || !v) return st->fail("<tag> without k/v");
    Tags* tags = nullptr;
    switch (st->open) {
      case XmlState::Open::kNode: tags = &st->entities.nodes.back().tags; break;
      case XmlState::Open::kWay: tags = &st->entities.ways.back().tags; break;
      case XmlState::Open::kRelation: tags = &st->entities.relations.back().tags; break;
      case XmlState::Open::kNone: return st->fail("<tag> outside of an entity");
    }
    (*tags)[k] = v;
  }
  // <osm>, <bounds>, <meta>, <note> and anything else are ignored.
}

void XMLCALL on_end(void* user, const XML_Char* name) {
  auto* st = static_cast<XmlState*>(user);
  if (std::strcmp(name, "node") == 0 || std::strcmp(name, "way") == 0 || std::strcmp(name, "relation") == 0) {
    st->open = XmlState::Open::kNone;
  }
}

OsmEntities parse_xml(const std::string& bytes) {
  XmlState st;
  st.parser = XML_ParserCreate("UTF-8");
  XML_SetUserData(st.parser, &st);
  XML_SetElementHandler(st.parser, on_start, on_end);
  const auto status = XML_Parse(st.parser, bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
  if (!st.error && status != XML_STATUS_OK) {
    st.error.emplace(fmt::format("malformed OSM XML: {}", XML_ErrorString(XML_GetErrorCode(st.parser))),
                     static_cast<std::size_t>(XML_GetCurrentByteIndex(st.parser)));
  }
  XML_ParserFree(st.parser);
  if (st.error) throw *st.error;
  return std::move(st.entities);
}

// ---- JSON ------------------------------------------------------------------

Tags json_tags(const json& el) {
  Tags tags;
  if (auto it = el.find("tags"); it != el.end()) {
    if (!it->is_object()) throw Error(ErrorCode::kParse, "tags must be an object");
    for (auto& [k, v] : it->items()) tags[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return tags;
}

OsmEntities parse_json(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed OSM JSON: {}", e.what()), e.byte);
  }
  OsmEntities out;
  if (!doc.is_object()) throw ParseError("OSM JSON root must be an object", 0);
  auto elements = doc.find("elements");
  if (elements == doc.end()) return out;
  if (!elements->is_array()) throw ParseError("'elements' must be an array", 0);
  std::size_t index = 0;
  for (const auto& el : *elements) {
    auto bad = [&](const std::string& what) {
      return ParseError(fmt::format("element #{}: {}", index, what), 0);
    };
    try {
      const std::string type = el.at("type").get<std::string>();
      const std::int64_t id = el.at("id").get<std::int64_t>();
      if (type == "node") {
        OsmNode n{id, {el.at("lat").get<double>(), el.at("lon").get<double>()}, json_tags(el)};
        if (!n.coord.valid()) throw bad("coordinates out of range");
        out.nodes.push_back(std::move(n));
      } else if (type == "way") {
        OsmWay w{id, {}, json_tags(el)};
        for (const auto& r : el.at("nodes")) w.node_refs.push_back(r.get<std::int64_t>());
        out.ways.push_back(std::move(w));
      } else if (type == "relation") {
        OsmRelation r{id, {}, json_tags(el)};
        for (const auto& m : el.at("members")) {
          r.members.push_back({m.at("type").get<std::string>(), m.at("ref").get<std::int64_t>(),
                               m.value("role", std::string{})});
        }
        out.relations.push_back(std::move(r));
      }
    } catch (const json::exception& e) {
      throw bad(e.what());
    } catch (const Error& e) {
      if (dynamic_cast<const ParseError*>(&e)) throw;
      throw bad(e.what());
    }
    ++index;
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void write_tags(std::string& out, const Tags& tags) {
  for (const auto& [k, v] : tags) {
    out += fmt::format("    <tag k=\"{}\" v=\"{}\"/>\n", xml_escape(k), xml_escape(v));
  }
}

}  // namespace

OsmEntities parse_osm(const RawDocument& document, Diagnostics& diagnostics) {
  if (is_blank(document.bytes)) return {};
  OsmEntities entities = document.format == DocumentFormat::kJson ? parse_json(document.bytes)
                                                                   : parse_xml(document.bytes);
  drop_dangling(entities, diagnostics);
  return entities;
}

std::string serialize_osm_xml(const OsmEntities& e) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"urbangen\">\n";
  for (const auto& n : e.nodes) {
    if (n.tags.empty()) {
      out += fmt::format("  <node id=\"{}\" lat=\"{:.9f}\" lon=\"{:.9f}\"/>\n", n.id, n.coord.lat, n.coord.lon);
    } else {
      out += fmt::format("  <node id=\"{}\" lat=\"{:.9f}\" lon=\"{:.9f}\">\n", n.id, n.coord.lat, n.coord.lon);
      write_tags(out, n.tags);
      out += "  </node>\n";
    }
  }
  for (const auto& w : e.ways) {
    out += fmt::format("  <way id=\"{}\">\n", w.id);
    for (auto ref : w.node_refs) out += fmt::format("    <nd ref=\"{}\"/>\n", ref);
    write_tags(out, w.tags);
    out += "  </way>\n";
  }
  for (const auto& r : e.relations) {
    out += fmt::format("  <relation id=\"{}\">\n", r.id);
    for (const auto& m : r.members) {
      out += fmt::format("    <member type=\"{}\" ref=\"{}\" role=\"{}\"/>\n", xml_escape(m.type), m.ref,
                         xml_escape(m.role));
    }
    write_tags(out, r.tags);
    out += "  </relation>\n";
  }
  out += "</osm>\n";
  return out;
}

OsmEntities select_box(const OsmEntities& all, const GeoBox& box) {
  std::set<std::int64_t> inside;
  for (const auto& n : all.nodes) {
    if (box.contains(n.coord)) inside.insert(n.id);
  }
  std::set<std::int64_t> keep_nodes;
  std::set<std::int64_t> keep_ways;
  OsmEntities out;
  for (const auto& w : all.ways) {
    const bool touches = std::any_of(w.node_refs.begin(), w.node_refs.end(),
                                     [&](std::int64_t r) { return inside.count(r) > 0; });
    if (!touches) continue;
    keep_ways.insert(w.id);
    keep_nodes.insert(w.node_refs.begin(), w.node_refs.end());
    out.ways.push_back(w);
  }
  for (const auto& r : all.relations) {
    const bool touches = std::any_of(r.members.begin(), r.members.end(), [&](const OsmMember& m) {
      return m.type == "way" && keep_ways.count(m.ref) > 0;
    });
    if (!touches) continue;
    // Pull in the remaining member ways so rings can be assembled.
    for (const auto& m : r.members) {
      if (m.type != "way" || keep_ways.count(m.ref)) continue;
      if (const OsmWay* w = all.way(m.ref)) {
        keep_ways.insert(w->id);
        keep_nodes.insert(w->node_refs.begin(), w->node_refs.end());
        out.ways.push_back(*w);
      }
    }
    out.relations.push_back(r);
  }
  for (const auto& n : all.nodes) {
    if (keep_nodes.count(n.id) || (!n.tags.empty() && inside.count(n.id))) out.nodes.push_back(n);
  }
  out.reindex();
  return out;
}

}  // namespace urbangen::geodata
