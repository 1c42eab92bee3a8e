#pragma once

#include "urbangen/geodata/types.hpp"

namespace urbangen::geodata {

// Local equirectangular tangent plane around `origin`:
//   x = (lon - lon0) * cos(lat0) * R * pi/180,  y = (lat - lat0) * R * pi/180.
// Adequate at city scale (errors well under a metre within 50 km).
LocalPoint project(const GeoCoord& coord, const ProjectionOrigin& origin);
GeoCoord unproject(const LocalPoint& point, const ProjectionOrigin& origin);

}  // namespace urbangen::geodata
