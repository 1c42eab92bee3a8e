#include "urbangen/imagery/curate.hpp"

#include <algorithm>
#include <cctype>

#include "urbangen/common/error.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::imagery {

using nlohmann::json;

namespace {

bool iequals(const std::string& a, const std::string& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::vector<DetectionBox> parse_detections(const json& record, int width, int height) {
  std::vector<DetectionBox> out;
  try {
    for (const auto& d : record.at("detections")) {
      DetectionBox box;
      box.label = d.at("label").get<std::string>();
      box.confidence = d.at("confidence").get<double>();
      if (!(box.confidence >= 0.0 && box.confidence <= 1.0)) {
        throw Error(ErrorCode::kProtocol, "detection confidence outside [0, 1]");
      }
      const auto& b = d.at("bbox");
      if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::kProtocol, "detection bbox must be [x, y, w, h]");
      const double x = b[0].get<double>(), y = b[1].get<double>(), w = b[2].get<double>(), h = b[3].get<double>();
      const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, width);
      const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, height);
      const int x1 = std::clamp(static_cast<int>(std::ceil(x + w)), 0, width);
      const int y1 = std::clamp(static_cast<int>(std::ceil(y + h)), 0, height);
      if (x1 <= x0 || y1 <= y0) continue;
      box.bbox = {x0, y0, x1 - x0, y1 - y0};
      out.push_back(std::move(box));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("malformed detector record: ") + e.what());
  }
  return out;
}

std::vector<std::pair<std::size_t, DetectionBox>> select_detections(std::span<const std::vector<DetectionBox>> per_image,
                                                                    const CurationOptions& options) {
  std::vector<std::pair<std::size_t, DetectionBox>> kept;
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    for (const auto& box : per_image[i]) {
      if (iequals(box.label, options.label) && box.confidence >= options.threshold) kept.emplace_back(i, box);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second.confidence > b.second.confidence; });
  if (kept.size() > options.top_k) kept.resize(options.top_k);
  return kept;
}

std::vector<CuratedView> curate_views(std::span<const StreetViewImage> images, tools::Toolbox& toolbox,
                                      const std::string& building_id, const CurationOptions& options) {
  std::vector<std::vector<DetectionBox>> per_image;
  for (const auto& img : images) {
    tools::ToolRequest req;
    req.tool = tools::ToolKind::kDetector;
    req.parts.push_back(tools::Part::make_image(img.pixels));
    const auto resp = toolbox.call(std::move(req));
    per_image.push_back(parse_detections(resp.record, img.pixels.width(), img.pixels.height()));
  }
  std::vector<CuratedView> out;
  for (const auto& [index, box] : select_detections(per_image, options)) {
    CuratedView v;
    v.crop = crop(images[index].pixels, box.bbox);
    v.confidence = box.confidence;
    v.parent = images[index].source_id;
    v.building = building_id;
    v.bbox = box.bbox;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace urbangen::imagery
