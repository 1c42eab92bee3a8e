#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "urbangen/geodata/osm.hpp"

namespace urbangen::geodata {

class DataSource {
 public:
  virtual ~DataSource() = default;
  // Throws Error(kTransient) on network/source failure (retryable).
  virtual RawDocument fetch(const GeoBox& box) = 0;
  virtual std::string describe() const = 0;
};

// Offline source backed by a checked-in OSM extract (XML or JSON). Returns
// the subset of the extract touching the requested box as OSM XML.
class FileSource final : public DataSource {
 public:
  explicit FileSource(std::filesystem::path path);
  RawDocument fetch(const GeoBox& box) override;
  std::string describe() const override;

 private:
  std::filesystem::path path_;
  std::once_flag loaded_;
  OsmEntities extract_;
};

// Live Overpass-compatible endpoint, e.g. https://overpass-api.de/api/interpreter.
class HttpSource final : public DataSource {
 public:
  explicit HttpSource(std::string url, int max_attempts = 3);
  RawDocument fetch(const GeoBox& box) override;
  std::string describe() const override { return url_; }

 private:
  std::string url_;
  int max_attempts_;
};

std::string bbox_cache_key(const GeoBox& box);

// Fetches `box` from `source`, caching the raw document under
// `cache_dir/{key}.osm`. A cache hit skips the source entirely. Writes are
// serialized per key and atomic. Throws Precondition for invalid or
// degenerate boxes.
RawDocument fetch_region(const GeoBox& box, DataSource& source, const std::filesystem::path& cache_dir);

}  // namespace urbangen::geodata
