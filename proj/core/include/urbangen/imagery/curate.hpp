#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/common/image.hpp"
#include "urbangen/imagery/streetview.hpp"

namespace urbangen::tools {
class Toolbox;
}

namespace urbangen::imagery {

struct DetectionBox {
  std::string label;
  double confidence = 0.0;
  PixelRect bbox;
};

struct CuratedView {
  RgbImage crop;
  double confidence = 0.0;
  std::string parent;  // source_id of the street-view image
  std::string building;
  PixelRect bbox;
};

struct CurationOptions {
  double threshold = 0.01;
  std::size_t top_k = 3;
  std::string label = "building";
};

// Detector record {"detections": [{"label", "confidence", "bbox": [x, y, w, h]}]}.
// Boxes are clipped to the image; boxes that vanish are dropped. Throws
// Error(kProtocol) on malformed records or confidences outside [0, 1].
std::vector<DetectionBox> parse_detections(const nlohmann::json& record, int width, int height);

// Keeps boxes with the configured label (case-insensitive) and confidence at or
// above the threshold, then the global top_k by confidence (stable on ties).
std::vector<std::pair<std::size_t, DetectionBox>> select_detections(
    std::span<const std::vector<DetectionBox>> per_image, const CurationOptions& options);

// Runs the detector on every image and crops the selected boxes.
std::vector<CuratedView> curate_views(std::span<const StreetViewImage> images, tools::Toolbox& toolbox,
                                      const std::string& building_id, const CurationOptions& options = {});

}  // namespace urbangen::imagery
