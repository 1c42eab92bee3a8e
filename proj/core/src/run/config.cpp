#include "urbangen/run/config.hpp"

#include <set>
#include <sstream>

#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"

namespace urbangen::run {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(fmt::format("unknown key '{}{}'", where, key));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(fmt::format("'{}{}' has the wrong type", where, key));
  }
}

const json& object_at(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_object()) fail(fmt::format("'{}' must be an object", key));
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path.lexically_normal() : (base / path).lexically_normal();
}

std::string path_string(const std::filesystem::path& p) { return p.string(); }

}  // namespace

geodata::GeoBox parse_bbox(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    item = first == std::string::npos ? "" : item.substr(first, item.find_last_not_of(" \t") - first + 1);
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0') fail(fmt::format("bbox entry '{}' is not a number", item));
    v.push_back(d);
  }
  if (v.size() != 4) fail("bbox needs min_lat,min_lon,max_lat,max_lon");
  const geodata::GeoBox box{{v[0], v[1]}, {v[2], v[3]}};
  if (!box.valid()) fail("bbox is out of range or not ordered south-west to north-east");
  return box;
}

void apply_backend_override(RunConfig& config, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) fail(fmt::format("backend override '{}' is not tool=mode", spec));
  const auto tool = spec.substr(0, eq);
  const auto mode = tools::backend_from_string(spec.substr(eq + 1));
  if (tool == "all") {
    for (auto t : tools::kAllTools) config.backends[t].mode = mode;
  } else {
    config.backends[tools::tool_from_string(tool)].mode = mode;
  }
}

void set_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.pipeline.seed = seed;
  config.traffic.seed = seed;
}

void RunConfig::validate() const {
  if (!bbox.valid()) fail("bbox is out of range or not ordered south-west to north-east");
  if (bbox.degenerate()) fail("bbox has zero extent");
  for (auto t : tools::kAllTools) {
    const auto it = backends.find(t);
    if (it == backends.end()) fail(fmt::format("no backend configured for tool '{}'", tools::to_string(t)));
    if (it->second.mode == tools::BackendKind::kLive) {
      if (!it->second.live || it->second.live->url.empty())
        fail(fmt::format("live backend for '{}' needs an endpoint url", tools::to_string(t)));
    }
  }
  if (paths.artifact_dir.empty()) fail("paths.artifact_dir is required");
  if (paths.osm_file.empty() == paths.osm_url.empty()) fail("exactly one of paths.osm_file and paths.osm_url is required");
  if (!paths.osm_file.empty() && !std::filesystem::exists(paths.osm_file))
    fail(fmt::format("paths.osm_file '{}' does not exist", paths.osm_file.string()));
  if (!paths.streetview_dir.empty() && !std::filesystem::is_directory(paths.streetview_dir))
    fail(fmt::format("paths.streetview_dir '{}' is not a directory", paths.streetview_dir.string()));
  if (!paths.streetview_dir.empty() && paths.streetview_http)
    fail("paths.streetview_dir and paths.streetview_http are mutually exclusive");
  if (!paths.library_dir.empty() && !std::filesystem::exists(paths.library_dir / "index.json"))
    fail(fmt::format("paths.library_dir '{}' has no index.json", paths.library_dir.string()));
  for (const auto* p : {&paths.ground_mesh, &paths.sky_mesh}) {
    if (!p->empty() && !std::filesystem::exists(*p)) fail(fmt::format("mesh '{}' does not exist", p->string()));
  }
  pipeline.validate();
  if (pipeline.seed != seed || traffic.seed != seed) fail("seed values disagree");
  for (const auto& r : rules) {
    try {
      r.validate();
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (lanes.primary < 1 || lanes.secondary < 1 || lanes.service < 1 || lanes.other < 1)
    fail("lane counts must be at least 1");
  if (traffic.vehicle_density < 0 || traffic.pedestrian_density < 0) fail("traffic densities must not be negative");
  if (!(traffic.vehicle_headway > 0) || !(traffic.pedestrian_headway > 0)) fail("traffic headways must be positive");
  std::set<std::string> names;
  for (const auto& m : evaluation.metrics) {
    if (m.name.empty() || m.command.empty()) fail("evaluation metrics need a name and a command");
    if (!names.insert(m.name).second || m.name == "edge_iou") fail(fmt::format("duplicate metric '{}'", m.name));
  }
}

json to_json(const RunConfig& c) {
  json backends = json::object();
  json live = json::object();
  for (const auto& [tool, b] : c.backends) {
    backends[std::string(tools::to_string(tool))] = std::string(tools::to_string(b.mode));
    if (b.live) {
      live[std::string(tools::to_string(tool))] = {{"url", b.live->url},
                                                   {"api_key_env", b.live->api_key_env},
                                                   {"timeout_seconds", b.live->timeout_seconds}};
    }
  }
  json metrics = json::array();
  for (const auto& m : c.evaluation.metrics) metrics.push_back({{"name", m.name}, {"command", m.command}});
  return {
      {"bbox",
       {{"min_lat", c.bbox.min.lat}, {"min_lon", c.bbox.min.lon}, {"max_lat", c.bbox.max.lat}, {"max_lon", c.bbox.max.lon}}},
      {"seed", c.seed},
      {"backends", backends},
      {"live", live},
      {"pipeline", agent::to_json(c.pipeline)},
      {"paths",
       {{"artifact_dir", path_string(c.paths.artifact_dir)},
        {"osm_file", path_string(c.paths.osm_file)},
        {"osm_url", c.paths.osm_url},
        {"osm_cache_dir", path_string(c.paths.osm_cache_dir)},
        {"streetview_dir", path_string(c.paths.streetview_dir)},
        {"streetview_http", c.paths.streetview_http},
        {"library_dir", path_string(c.paths.library_dir)},
        {"replay_dir", path_string(c.paths.replay_dir)},
        {"ground_mesh", path_string(c.paths.ground_mesh)},
        {"sky_mesh", path_string(c.paths.sky_mesh)}}},
      {"furnish", furnish::rules_to_json(c.rules)},
      {"lanes",
       {{"primary", c.lanes.primary}, {"secondary", c.lanes.secondary}, {"service", c.lanes.service}, {"other", c.lanes.other}}},
      {"traffic",
       {{"vehicle_density", c.traffic.vehicle_density},
        {"pedestrian_density", c.traffic.pedestrian_density},
        {"vehicle_headway", c.traffic.vehicle_headway},
        {"pedestrian_headway", c.traffic.pedestrian_headway}}},
      {"evaluation", {{"judge", c.evaluation.judge}, {"metrics", metrics}}},
  };
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail("run configuration must be a JSON object");
  reject_unknown(j,
                 {"bbox", "seed", "backends", "live", "pipeline", "paths", "furnish", "lanes", "traffic", "evaluation"},
                 "");
  RunConfig c;
  if (j.contains("bbox")) {
    const auto& b = j["bbox"];
    if (b.is_string()) {
      c.bbox = parse_bbox(b.get<std::string>());
    } else {
      const auto& o = object_at(j, "bbox");
      reject_unknown(o, {"min_lat", "min_lon", "max_lat", "max_lon"}, "bbox.");
      read(o, "min_lat", c.bbox.min.lat, "bbox.");
      read(o, "min_lon", c.bbox.min.lon, "bbox.");
      read(o, "max_lat", c.bbox.max.lat, "bbox.");
      read(o, "max_lon", c.bbox.max.lon, "bbox.");
    }
  }
  if (j.contains("pipeline")) c.pipeline = agent::pipeline_config_from_json(j["pipeline"]);
  std::uint64_t seed = c.pipeline.seed;
  read(j, "seed", seed, "");
  set_seed(c, seed);

  if (j.contains("backends")) {
    for (const auto& [name, mode] : object_at(j, "backends").items()) {
      if (!mode.is_string()) fail(fmt::format("'backends.{}' must be a string", name));
      apply_backend_override(c, name + "=" + mode.get<std::string>());
    }
  }
  if (j.contains("live")) {
    for (const auto& [name, ep] : object_at(j, "live").items()) {
      if (!ep.is_object()) fail(fmt::format("'live.{}' must be an object", name));
      const auto where = fmt::format("live.{}.", name);
      reject_unknown(ep, {"url", "api_key_env", "timeout_seconds"}, where);
      tools::LiveEndpoint e;
      read(ep, "url", e.url, where);
      read(ep, "api_key_env", e.api_key_env, where);
      read(ep, "timeout_seconds", e.timeout_seconds, where);
      c.backends[tools::tool_from_string(name)].live = e;
    }
  }
  if (j.contains("paths")) {
    const auto& p = object_at(j, "paths");
    reject_unknown(p,
                   {"artifact_dir", "osm_file", "osm_url", "osm_cache_dir", "streetview_dir", "streetview_http",
                    "library_dir", "replay_dir", "ground_mesh", "sky_mesh"},
                   "paths.");
    auto path = [&](const char* key, std::filesystem::path& out) {
      std::string s;
      read(p, key, s, "paths.");
      out = resolve(base_dir, s);
    };
    path("artifact_dir", c.paths.artifact_dir);
    path("osm_file", c.paths.osm_file);
    read(p, "osm_url", c.paths.osm_url, "paths.");
    path("osm_cache_dir", c.paths.osm_cache_dir);
    path("streetview_dir", c.paths.streetview_dir);
    read(p, "streetview_http", c.paths.streetview_http, "paths.");
    path("library_dir", c.paths.library_dir);
    path("replay_dir", c.paths.replay_dir);
    path("ground_mesh", c.paths.ground_mesh);
    path("sky_mesh", c.paths.sky_mesh);
  }
  if (j.contains("furnish")) {
    try {
      c.rules = furnish::rules_from_json(j["furnish"]);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (j.contains("lanes")) {
    const auto& l = object_at(j, "lanes");
    reject_unknown(l, {"primary", "secondary", "service", "other"}, "lanes.");
    read(l, "primary", c.lanes.primary, "lanes.");
    read(l, "secondary", c.lanes.secondary, "lanes.");
    read(l, "service", c.lanes.service, "lanes.");
    read(l, "other", c.lanes.other, "lanes.");
  }
  if (j.contains("traffic")) {
    const auto& t = object_at(j, "traffic");
    reject_unknown(t, {"vehicle_density", "pedestrian_density", "vehicle_headway", "pedestrian_headway"}, "traffic.");
    read(t, "vehicle_density", c.traffic.vehicle_density, "traffic.");
    read(t, "pedestrian_density", c.traffic.pedestrian_density, "traffic.");
    read(t, "vehicle_headway", c.traffic.vehicle_headway, "traffic.");
    read(t, "pedestrian_headway", c.traffic.pedestrian_headway, "traffic.");
  }
  if (j.contains("evaluation")) {
    const auto& e = object_at(j, "evaluation");
    reject_unknown(e, {"judge", "metrics"}, "evaluation.");
    read(e, "judge", c.evaluation.judge, "evaluation.");
    if (e.contains("metrics")) {
      if (!e["metrics"].is_array()) fail("'evaluation.metrics' must be an array");
      for (const auto& m : e["metrics"]) {
        if (!m.is_object()) fail("evaluation metrics must be objects");
        reject_unknown(m, {"name", "command"}, "evaluation.metrics.");
        MetricCommand mc;
        read(m, "name", mc.name, "evaluation.metrics.");
        read(m, "command", mc.command, "evaluation.metrics.");
        c.evaluation.metrics.push_back(std::move(mc));
      }
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file_text(path));
  } catch (const json::exception& e) {
    fail(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const Error& e) {
    fail(e.what());
  }
  return run_config_from_json(j, std::filesystem::absolute(path).parent_path());
}

}  // namespace urbangen::run
