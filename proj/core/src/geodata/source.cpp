#include "urbangen/geodata/source.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/common/http.hpp"

namespace urbangen::geodata {

namespace fs = std::filesystem;

FileSource::FileSource(fs::path path) : path_(std::move(path)) {}

std::string FileSource::describe() const { return "file:" + path_.string(); }

RawDocument FileSource::fetch(const GeoBox& box) {
  std::call_once(loaded_, [&] {
    RawDocument doc;
    try {
      doc.bytes = read_file_text(path_);
    } catch (const Error& e) {
      throw Error(ErrorCode::kTransient, std::string("file source unavailable: ") + e.what());
    }
    doc.format = detect_format(doc.bytes);
    Diagnostics ignored;
    extract_ = parse_osm(doc, ignored);
  });
  return {DocumentFormat::kXml, serialize_osm_xml(select_box(extract_, box))};
}

HttpSource::HttpSource(std::string url, int max_attempts) : url_(std::move(url)), max_attempts_(max_attempts) {}

RawDocument HttpSource::fetch(const GeoBox& box) {
  const std::string query = fmt::format(
      "[out:xml][timeout:60];(way({0:.7f},{1:.7f},{2:.7f},{3:.7f});relation({0:.7f},{1:.7f},{2:.7f},{3:.7f}););"
      "(._;>;);out body;",
      box.min.lat, box.min.lon, box.max.lat, box.max.lon);
  std::string last_error;
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << attempt));
    std::string err;
    auto res = http::post_form(url_, {{"data", query}}, &err);
    if (res && res->status == 200) return {detect_format(res->body), res->body};
    last_error = res ? fmt::format("HTTP {}", res->status) : err;
  }
  throw Error(ErrorCode::kTransient, fmt::format("OSM endpoint {} failed: {}", url_, last_error));
}

std::string bbox_cache_key(const GeoBox& box) {
  return sha256_hex(fmt::format("bbox:{:.9f},{:.9f},{:.9f},{:.9f}", box.min.lat, box.min.lon, box.max.lat,
                                box.max.lon));
}

namespace {

std::mutex& key_mutex(const std::string& key) {
  static std::mutex table_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> table;
  std::lock_guard lock(table_mutex);
  auto& slot = table[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

}  // namespace

RawDocument fetch_region(const GeoBox& box, DataSource& source, const fs::path& cache_dir) {
  if (!box.valid()) throw Error(ErrorCode::kPrecondition, "invalid bounding box");
  if (box.degenerate()) throw Error(ErrorCode::kPrecondition, "degenerate bounding box (min == max)");
  if (cache_dir.empty()) return source.fetch(box);

  const std::string key = bbox_cache_key(box);
  const fs::path cached = cache_dir / (key + ".osm");
  std::lock_guard lock(key_mutex(key));
  if (fs::exists(cached)) {
    RawDocument doc;
    doc.bytes = read_file_text(cached);
    doc.format = detect_format(doc.bytes);
    return doc;
  }
  RawDocument doc = source.fetch(box);
  write_file_atomic(cached, doc.bytes);
  return doc;
}

}  // namespace urbangen::geodata
