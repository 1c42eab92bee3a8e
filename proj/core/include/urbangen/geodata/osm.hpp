#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/geodata/types.hpp"

namespace urbangen::geodata {

enum class DocumentFormat { kXml, kJson };

// Raw OSM document as fetched from a source: OSM XML or Overpass-style JSON.
struct RawDocument {
  DocumentFormat format = DocumentFormat::kXml;
  std::string bytes;
};

DocumentFormat detect_format(std::string_view bytes);

struct OsmNode {
  std::int64_t id = 0;
  GeoCoord coord;
  Tags tags;
};

struct OsmWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> node_refs;
  Tags tags;

  bool closed() const { return node_refs.size() >= 4 && node_refs.front() == node_refs.back(); }
};

struct OsmMember {
  std::string type;  // "node" | "way" | "relation"
  std::int64_t ref = 0;
  std::string role;
};

struct OsmRelation {
  std::int64_t id = 0;
  std::vector<OsmMember> members;
  Tags tags;
};

class OsmEntities {
 public:
  std::vector<OsmNode> nodes;
  std::vector<OsmWay> ways;
  std::vector<OsmRelation> relations;

  bool empty() const { return nodes.empty() && ways.empty() && relations.empty(); }
  std::size_t size() const { return nodes.size() + ways.size() + relations.size(); }

  // Rebuilds the id lookup tables; call after mutating the vectors.
  void reindex();
  const OsmNode* node(std::int64_t id) const;
  const OsmWay* way(std::int64_t id) const;

 private:
  std::unordered_map<std::int64_t, std::size_t> node_index_;
  std::unordered_map<std::int64_t, std::size_t> way_index_;
};

// Parses an OSM XML or JSON document. Unknown tags are kept verbatim.
// Malformed input throws ParseError carrying the byte offset; ways that
// reference missing nodes are dropped with a "dangling_node" diagnostic.
OsmEntities parse_osm(const RawDocument& document, Diagnostics& diagnostics);

// Canonical OSM XML serialization (entities in input order).
std::string serialize_osm_xml(const OsmEntities& entities);

// Subset of `all` touching `box`: every way with at least one node inside the
// box (with all of its nodes), relations referencing a selected way, and
// tagged nodes inside the box.
OsmEntities select_box(const OsmEntities& all, const GeoBox& box);

}  // namespace urbangen::geodata
