#include "urbangen/geodata/projection.hpp"

#include <cmath>

namespace urbangen::geodata {

LocalPoint project(const GeoCoord& coord, const ProjectionOrigin& origin) {
  const double k = origin.earth_radius * kPi / 180.0;
  const double cos0 = std::cos(deg2rad(origin.origin.lat));
  return {(coord.lon - origin.origin.lon) * cos0 * k, (coord.lat - origin.origin.lat) * k};
}

GeoCoord unproject(const LocalPoint& point, const ProjectionOrigin& origin) {
  const double k = origin.earth_radius * kPi / 180.0;
  const double cos0 = std::cos(deg2rad(origin.origin.lat));
  return {origin.origin.lat + point.y / k, origin.origin.lon + point.x / (cos0 * k)};
}

}  // namespace urbangen::geodata
