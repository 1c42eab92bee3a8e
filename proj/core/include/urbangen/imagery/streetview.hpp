#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urbangen/common/diagnostics.hpp"
#include "urbangen/common/image.hpp"
#include "urbangen/geodata/types.hpp"

namespace urbangen::imagery {

struct StreetViewImage {
  RgbImage pixels;
  geodata::GeoCoord capture;
  double heading = 0.0;  // degrees clockwise from north, [0, 360)
  std::string source_id;
};

struct CapturePoint {
  geodata::GeoCoord coord;
  geodata::LocalPoint local;
  double heading = 0.0;
};

struct CaptureOptions {
  int max_points = 4;
  double radius = 60.0;             // metres from the footprint centroid
  double sample_spacing = 5.0;      // candidate spacing along road centrelines
  double fallback_distance = 30.0;  // compass points when no road is near
  double fov_deg = 90.0;
};

// Degrees clockwise from north of the direction from -> to.
double bearing_deg(const geodata::LocalPoint& from, const geodata::LocalPoint& to);

// Up to max_points spread-out points on road centrelines within `radius` of the
// footprint centroid, each looking at the centroid. Falls back to four compass
// points at fallback_distance. A point on the centroid gets heading 0 and a
// "coincident_capture_point" diagnostic.
std::vector<CapturePoint> plan_capture_points(const geodata::BuildingFootprint& footprint,
                                              std::span<const geodata::RoadSegment> roads,
                                              const geodata::ProjectionOrigin& origin, const CaptureOptions& options,
                                              Diagnostics& diag);

class StreetViewClient {
 public:
  virtual ~StreetViewClient() = default;
  // nullopt when no imagery exists for the point.
  virtual std::optional<StreetViewImage> fetch(const CapturePoint& point) = 0;
};

// "{lat:.6f}_{lon:.6f}_{heading:.0f}.png"; heading rounded to whole degrees in [0, 360).
std::string fixture_filename(const geodata::GeoCoord& coord, double heading);

// Reads fixture images named by fixture_filename from a directory.
class DirectoryClient : public StreetViewClient {
 public:
  explicit DirectoryClient(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::optional<StreetViewImage> fetch(const CapturePoint& point) override;

 private:
  std::filesystem::path dir_;
};

struct HttpClientConfig {
  std::string endpoint;  // GET endpoint returning a PNG
  std::string api_key;
  int width = 640;
  int height = 640;
  double fov_deg = 90.0;
  std::filesystem::path record_dir;  // when set, fetched images are saved under fixture names
};

// Query parameters: location=lat,lon, heading, fov, size=WxH, key. HTTP 404
// means no imagery; other failures raise Error(kTransient).
class HttpClient : public StreetViewClient {
 public:
  explicit HttpClient(HttpClientConfig config);
  std::optional<StreetViewImage> fetch(const CapturePoint& point) override;

 private:
  HttpClientConfig config_;
};

// Endpoint and key from URBANGEN_STREETVIEW_URL / URBANGEN_STREETVIEW_KEY.
HttpClientConfig http_config_from_env();

// One image per point with imagery; gaps are reported as "streetview_missing".
// Throws Error(kPerceptionUnavailable) when points exist but none has imagery.
std::vector<StreetViewImage> fetch_street_views(std::span<const CapturePoint> points, StreetViewClient& client,
                                                const std::string& building_id, Diagnostics& diag);

}  // namespace urbangen::imagery
