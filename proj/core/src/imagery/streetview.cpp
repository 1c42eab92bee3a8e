#include "urbangen/imagery/streetview.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/http.hpp"
#include "urbangen/geodata/projection.hpp"

namespace urbangen::imagery {

namespace fs = std::filesystem;
using geodata::LocalPoint;

double bearing_deg(const LocalPoint& from, const LocalPoint& to) {
  const Vec2 d = to - from;
  return rad2deg(normalize_angle(std::atan2(d.x, d.y)));
}

std::vector<CapturePoint> plan_capture_points(const geodata::BuildingFootprint& footprint,
                                              std::span<const geodata::RoadSegment> roads,
                                              const geodata::ProjectionOrigin& origin, const CaptureOptions& options,
                                              Diagnostics& diag) {
  const LocalPoint c = polygon::centroid(footprint.polygon);

  // Candidates: the closest point of each nearby road plus regular samples.
  std::vector<LocalPoint> candidates;
  for (const auto& road : roads) {
    const auto& line = road.polyline;
    if (line.size() < 2 || polyline::distance_to(line, c) > options.radius) continue;
    double best = 1e300;
    LocalPoint closest;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const LocalPoint q = closest_point_on_segment(c, line[i], line[i + 1]);
      if (distance(q, c) < best) best = distance(q, c), closest = q;
    }
    candidates.push_back(closest);
    const double len = polyline::length(line);
    for (double s = 0.0; s <= len + 1e-9; s += options.sample_spacing) {
      const LocalPoint p = polyline::at(line, s).point;
      if (distance(p, c) <= options.radius) candidates.push_back(p);
    }
  }

  std::vector<LocalPoint> chosen;
  if (!candidates.empty()) {
    // Nearest first, then farthest-point spreading.
    std::size_t first = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (distance(candidates[i], c) < distance(candidates[first], c)) first = i;
    }
    chosen.push_back(candidates[first]);
    std::vector<double> gap(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) gap[i] = distance(candidates[i], chosen[0]);
    while (static_cast<int>(chosen.size()) < options.max_points) {
      std::size_t pick = 0;
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (gap[i] > gap[pick]) pick = i;
      }
      if (gap[pick] < 1e-6) break;
      chosen.push_back(candidates[pick]);
      for (std::size_t i = 0; i < candidates.size(); ++i) gap[i] = std::min(gap[i], distance(candidates[i], candidates[pick]));
    }
  } else {
    const double d = options.fallback_distance;
    chosen = {c + Vec2{0, d}, c + Vec2{d, 0}, c + Vec2{0, -d}, c + Vec2{-d, 0}};
    chosen.resize(std::min<std::size_t>(chosen.size(), static_cast<std::size_t>(std::max(options.max_points, 0))));
    diag.info("capture_fallback", footprint.id, "no road within range; using compass capture points");
  }

  std::vector<CapturePoint> out;
  for (const auto& p : chosen) {
    CapturePoint cp;
    cp.local = p;
    cp.coord = geodata::unproject(p, origin);
    if (distance(p, c) < 1e-9) {
      cp.heading = 0.0;
      diag.warn("coincident_capture_point", footprint.id, "capture point lies on the footprint centroid; heading set to 0");
    } else {
      cp.heading = bearing_deg(p, c);
    }
    out.push_back(cp);
  }
  return out;
}

std::string fixture_filename(const geodata::GeoCoord& coord, double heading) {
  long h = std::lround(heading) % 360;
  if (h < 0) h += 360;
  return fmt::format("{:.6f}_{:.6f}_{}.png", coord.lat, coord.lon, h);
}

std::optional<StreetViewImage> DirectoryClient::fetch(const CapturePoint& point) {
  const auto name = fixture_filename(point.coord, point.heading);
  const auto path = dir_ / name;
  if (!fs::exists(path)) return std::nullopt;
  StreetViewImage img;
  img.pixels = read_png(path);
  img.capture = point.coord;
  img.heading = point.heading;
  img.source_id = name;
  return img;
}

HttpClient::HttpClient(HttpClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::kConfig, "street-view endpoint is not configured");
}

std::optional<StreetViewImage> HttpClient::fetch(const CapturePoint& point) {
  const std::map<std::string, std::string> query = {
      {"location", fmt::format("{:.6f},{:.6f}", point.coord.lat, point.coord.lon)},
      {"heading", fmt::format("{:.1f}", point.heading)},
      {"fov", fmt::format("{:.0f}", config_.fov_deg)},
      {"size", fmt::format("{}x{}", config_.width, config_.height)},
      {"key", config_.api_key},
  };
  std::string err;
  auto resp = http::get(config_.endpoint, query, {}, &err);
  if (!resp) throw Error(ErrorCode::kTransient, "street-view request failed: " + err);
  if (resp->status == 404) return std::nullopt;
  if (resp->status != 200) throw Error(ErrorCode::kTransient, fmt::format("street-view endpoint returned HTTP {}", resp->status));
  const std::vector<std::uint8_t> bytes(resp->body.begin(), resp->body.end());
  StreetViewImage img;
  img.pixels = decode_png(bytes);
  img.capture = point.coord;
  img.heading = point.heading;
  img.source_id = fixture_filename(point.coord, point.heading);
  if (!config_.record_dir.empty()) write_file_atomic(config_.record_dir / img.source_id, bytes);
  return img;
}

HttpClientConfig http_config_from_env() {
  HttpClientConfig c;
  if (const char* u = std::getenv("URBANGEN_STREETVIEW_URL")) c.endpoint = u;
  if (const char* k = std::getenv("URBANGEN_STREETVIEW_KEY")) c.api_key = k;
  return c;
}

std::vector<StreetViewImage> fetch_street_views(std::span<const CapturePoint> points, StreetViewClient& client,
                                                const std::string& building_id, Diagnostics& diag) {
  std::vector<StreetViewImage> out;
  for (const auto& p : points) {
    auto img = client.fetch(p);
    if (img && !img->pixels.empty()) {
      out.push_back(std::move(*img));
    } else {
      diag.warn("streetview_missing", building_id, "no imagery for " + fixture_filename(p.coord, p.heading));
    }
  }
  if (out.empty() && !points.empty()) {
    throw Error(ErrorCode::kPerceptionUnavailable, "no street-view imagery for building " + building_id);
  }
  return out;
}

}  // namespace urbangen::imagery
