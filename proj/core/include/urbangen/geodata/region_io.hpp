#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbangen/geodata/types.hpp"

namespace urbangen::geodata {

inline constexpr int kRegionSchemaVersion = 1;

nlohmann::json to_json(const RegionModel& region);
// Throws Error(kParse) on schema violations or an unsupported schema_version.
RegionModel region_from_json(const nlohmann::json& doc);

void save_region(const std::filesystem::path& path, const RegionModel& region);
RegionModel load_region(const std::filesystem::path& path);

nlohmann::json points_to_json(std::span<const LocalPoint> points);
std::vector<LocalPoint> points_from_json(const nlohmann::json& arr);

}  // namespace urbangen::geodata
