#include "urbangen/run/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "urbangen/agent/reflection.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/evalkit/report.hpp"
#include "urbangen/geodata/extract.hpp"
#include "urbangen/geodata/osm.hpp"
#include "urbangen/geodata/region_io.hpp"
#include "urbangen/geodata/source.hpp"
#include "urbangen/imagery/curate.hpp"
#include "urbangen/mesh/cleanup.hpp"
#include "urbangen/mesh/scaffold.hpp"
#include "urbangen/roadnet/roadnet.hpp"
#include "urbangen/scenedesign/align.hpp"
#include "urbangen/scenedesign/scene.hpp"
#include "urbangen/tools/mocks.hpp"

namespace urbangen::run {

using agent::BuildingJob;
using agent::JobFailure;
using agent::Stage;
using nlohmann::json;

namespace {

constexpr RunStage kStages[] = {RunStage::kFetch,       RunStage::kPerception, RunStage::kImagination,
                                RunStage::kGen3D,       RunStage::kPostProcess, RunStage::kAlign,
                                RunStage::kRoads,       RunStage::kFurnish,    RunStage::kAssemble,
                                RunStage::kEvaluate};

// Job stage at which a building stage picks a job up.
Stage entry_stage(RunStage s) {
  switch (s) {
    case RunStage::kPerception: return Stage::kPerception;
    case RunStage::kImagination: return Stage::kImagination;
    case RunStage::kGen3D: return Stage::kGen3D;
    case RunStage::kPostProcess: return Stage::kPostProcess;
    case RunStage::kAlign: return Stage::kAligned;
    default: break;
  }
  throw Error(ErrorCode::kPrecondition, "not a building stage");
}

// Building stage that moves jobs out of `stage`.
RunStage producer_of(Stage stage) {
  switch (stage) {
    case Stage::kPerception: return RunStage::kPerception;
    case Stage::kImagination:
    case Stage::kReflection: return RunStage::kImagination;
    case Stage::kGen3D: return RunStage::kGen3D;
    case Stage::kPostProcess: return RunStage::kPostProcess;
    default: return RunStage::kAlign;
  }
}

int stage_rank(Stage s) {
  // Reflection belongs to the imagination stage.
  if (s == Stage::kReflection) return static_cast<int>(Stage::kImagination);
  return static_cast<int>(s);
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

// Tool failures inside a building stage end the job with a cause naming the tool.
[[noreturn]] void tool_failure(std::string_view tool, const Error& e) {
  const bool protocol = e.code() == ErrorCode::kProtocol;
  throw JobFailure(fmt::format("{}{}", tool, protocol ? "ProtocolError" : "Unavailable"), e.code(), e.what());
}

std::string region_tags(const geodata::RegionModel& region) {
  std::string out;
  auto tags = [](const geodata::Tags& t) {
    std::string s;
    for (const auto& [k, v] : t) s += fmt::format("{}{}={}", s.empty() ? "" : "; ", k, v);
    return s;
  };
  for (const auto& b : region.buildings) out += fmt::format("building {}: {}\n", b.id, tags(b.tags));
  for (const auto& r : region.roads) out += fmt::format("road {}: {}\n", r.id, tags(r.tags));
  return out;
}

}  // namespace

std::string_view to_string(RunStage stage) {
  switch (stage) {
    case RunStage::kFetch: return "fetch";
    case RunStage::kPerception: return "perception";
    case RunStage::kImagination: return "imagination";
    case RunStage::kGen3D: return "gen3d";
    case RunStage::kPostProcess: return "postprocess";
    case RunStage::kAlign: return "align";
    case RunStage::kRoads: return "roads";
    case RunStage::kFurnish: return "furnish";
    case RunStage::kAssemble: return "assemble";
    case RunStage::kEvaluate: return "evaluate";
  }
  return "?";
}

RunStage run_stage_from_string(std::string_view name) {
  for (auto s : kStages)
    if (to_string(s) == name) return s;
  throw Error(ErrorCode::kConfig, fmt::format("unknown stage '{}'", name));
}

std::span<const RunStage> all_run_stages() { return kStages; }

bool is_job_stage(RunStage s) {
  return s == RunStage::kPerception || s == RunStage::kImagination || s == RunStage::kGen3D ||
         s == RunStage::kPostProcess || s == RunStage::kAlign;
}

ExitCode exit_code_for_cause(const std::string& cause) {
  const auto ends_with = [&](std::string_view suffix) {
    return cause.size() >= suffix.size() && cause.compare(cause.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("Unavailable") || ends_with("ProtocolError")) return ExitCode::kTool;
  return ExitCode::kData;
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)), store_([&] {
  config_.validate();
  return config_.paths.artifact_dir;
}()) {
  if (config_.paths.replay_dir.empty()) config_.paths.replay_dir = config_.paths.artifact_dir / "replay";
  if (config_.paths.osm_cache_dir.empty()) config_.paths.osm_cache_dir = config_.paths.artifact_dir / "osm_cache";
  const auto text = to_json(config_).dump(2) + "\n";
  const auto path = store_.file("config.json");
  if (std::filesystem::exists(path)) {
    if (read_file_text(path) != text)
      throw Error(ErrorCode::kConfig,
                  fmt::format("{} holds a run with a different configuration", config_.paths.artifact_dir.string()));
  } else {
    write_file_atomic(path, text);
  }
  store_.read_ledger();  // refuses a corrupt ledger before any work
  if (!config_.paths.streetview_dir.empty())
    streetview_ = std::make_shared<imagery::DirectoryClient>(config_.paths.streetview_dir);
  else if (config_.paths.streetview_http)
    streetview_ = std::make_shared<imagery::HttpClient>(imagery::http_config_from_env());
}

std::unique_ptr<Pipeline> Pipeline::open(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "config.json";
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::kPrerequisite, fmt::format("{} is not a run directory (no config.json)", run_dir.string()));
  return std::make_unique<Pipeline>(load_run_config(path));
}

void Pipeline::log(const std::string& message) const {
  if (log_) log_(message);
}

const geodata::RegionModel& Pipeline::region() {
  if (!region_) {
    const auto path = store_.file("region.json");
    if (!std::filesystem::exists(path))
      throw Error(ErrorCode::kPrerequisite, "region.json is missing; run the fetch stage first");
    region_ = std::make_shared<const geodata::RegionModel>(geodata::load_region(path));
  }
  return *region_;
}

void Pipeline::override_backend(tools::ToolKind tool, std::shared_ptr<tools::Backend> backend) {
  overrides_[tool] = backend;
  if (toolbox_) toolbox_->set_backend(tool, std::move(backend));
}

void Pipeline::set_streetview_client(std::shared_ptr<imagery::StreetViewClient> client) {
  streetview_ = std::move(client);
}

tools::Toolbox& Pipeline::toolbox() {
  if (toolbox_) return *toolbox_;
  auto tb = std::make_unique<tools::Toolbox>(store_.meshes());
  auto cache = std::make_shared<tools::ReplayCache>(config_.paths.replay_dir);
  for (auto tool : tools::kAllTools) {
    json params = tools::default_params(tool);
    if (const auto it = config_.pipeline.tool_params.find(tool); it != config_.pipeline.tool_params.end())
      for (const auto& [k, v] : it->second.items()) params[k] = v;
    tb->set_params(tool, params);

    if (const auto it = overrides_.find(tool); it != overrides_.end()) {
      tb->set_backend(tool, it->second);
      continue;
    }
    const auto& bc = config_.backends.at(tool);
    std::shared_ptr<tools::Backend> backend;
    switch (bc.mode) {
      case tools::BackendKind::kReplay:
        backend = std::make_shared<tools::ReplayBackend>(cache);
        break;
      case tools::BackendKind::kLive:
        backend = std::make_shared<tools::LiveBackend>(*bc.live, tools::RetryPolicy{}, cache);
        break;
      case tools::BackendKind::kMock: {
        tools::MockBackend::Script script;
        switch (tool) {
          case tools::ToolKind::kDetector: script = tools::mocks::detector(); break;
          case tools::ToolKind::kEnvInfoExtractor: script = tools::mocks::env_info(); break;
          case tools::ToolKind::kImaginer: script = tools::mocks::imaginer(); break;
          case tools::ToolKind::kCritic: script = tools::mocks::critic(); break;
          case tools::ToolKind::kShapeGenerator:
            region();
            script = tools::mocks::shape_from_region(region_);
            break;
          case tools::ToolKind::kTexturePainter: script = tools::mocks::texture_painter(); break;
          case tools::ToolKind::kJudge: script = tools::mocks::judge(); break;
        }
        backend = std::make_shared<tools::RecordingBackend>(std::make_shared<tools::MockBackend>(std::move(script)),
                                                            cache);
        break;
      }
    }
    tb->set_backend(tool, std::move(backend));
  }
  toolbox_ = std::move(tb);
  return *toolbox_;
}

const furnish::AssetLibrary& Pipeline::library() {
  if (!library_) {
    library_ = config_.paths.library_dir.empty() ? furnish::AssetLibrary::builtin()
                                                 : furnish::AssetLibrary::load(config_.paths.library_dir);
  }
  return *library_;
}

std::vector<BuildingJob> Pipeline::jobs() const {
  std::vector<BuildingJob> out;
  const auto dir = store_.root() / "jobs";
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids)
    if (auto job = store_.load_job(id)) out.push_back(std::move(*job));
  return out;
}

void Pipeline::transition(BuildingJob& job, Stage to, json extra) {
  const Stage from = job.stage;
  if (to == Stage::kFailed)
    job.fail(*job.failure);
  else
    job.advance(to);
  json entry = {{"event", "transition"},
                {"job", job.building},
                {"from", std::string(agent::to_string(from))},
                {"stage", std::string(agent::to_string(job.stage))},
                {"attempt", job.attempts},
                {"artifacts", job.artifacts}};
  for (const auto& [k, v] : extra.items()) entry[k] = v;
  store_.append_ledger(std::move(entry));
}

// ---------------------------------------------------------------- region stages

void Pipeline::fetch() {
  std::unique_ptr<geodata::DataSource> source;
  if (!config_.paths.osm_file.empty())
    source = std::make_unique<geodata::FileSource>(config_.paths.osm_file);
  else
    source = std::make_unique<geodata::HttpSource>(config_.paths.osm_url);
  const auto raw = geodata::fetch_region(config_.bbox, *source, config_.paths.osm_cache_dir);
  const auto entities = geodata::parse_osm(raw, diag_);
  const auto region = geodata::build_region(entities, config_.bbox, diag_);
  geodata::save_region(store_.file("region.json"), region);
  region_ = std::make_shared<const geodata::RegionModel>(region);

  std::size_t created = 0;
  for (auto& job : agent::plan(region, config_.pipeline)) {
    if (store_.load_job(job.building)) continue;
    store_.save_job(job);
    store_.append_ledger({{"event", "planned"}, {"job", job.building}, {"stage", "perception"}, {"attempt", 0}});
    ++created;
  }
  store_.mark_stage("fetch", {{"buildings", region.buildings.size()},
                              {"roads", region.roads.size()},
                              {"elements", region.elements.size()},
                              {"planned", created}});
  log(fmt::format("fetch: {} buildings, {} roads, {} land elements", region.buildings.size(), region.roads.size(),
                  region.elements.size()));
}

void Pipeline::require_file(const std::string& name, RunStage needed_by, RunStage producer) const {
  if (!std::filesystem::exists(store_.file(name)))
    throw Error(ErrorCode::kPrerequisite, fmt::format("stage {} needs {} (produced by stage {})", to_string(needed_by),
                                                      name, to_string(producer)));
}

void Pipeline::roads() {
  require_file("region.json", RunStage::kRoads, RunStage::kFetch);
  const auto network = roadnet::build_network(region(), config_.lanes, config_.traffic, diag_);
  const auto text = roadnet::to_json(network).dump(2) + "\n";
  write_file_atomic(store_.file("roadnet.json"), text);
  store_.mark_stage("roads", {{"lanes", network.lanes.size()},
                              {"junctions", network.junctions.size()},
                              {"agents", network.agents.size()},
                              {"digest", store_.put_text(text)}});
  log(fmt::format("roads: {} lanes, {} junctions, {} agents", network.lanes.size(), network.junctions.size(),
                  network.agents.size()));
}

void Pipeline::furnish() {
  require_file("region.json", RunStage::kFurnish, RunStage::kFetch);
  require_file("roadnet.json", RunStage::kFurnish, RunStage::kRoads);
  const auto& reg = region();
  const auto network = roadnet::network_from_json(json::parse(read_file_text(store_.file("roadnet.json"))));
  auto result = furnish::furnish_region(reg, config_.rules, library(), network.junctions, diag_);

  // Street views gathered during perception feed the environment extractor.
  std::vector<RgbImage> views;
  for (const auto& job : jobs()) {
    if (job.stage == Stage::kFailed) continue;
    if (const auto it = job.artifacts.find("view0"); it != job.artifacts.end())
      views.push_back(decode_png(store_.get(it->second)));
    if (views.size() >= 3) break;
  }
  furnish::VlmHints hints;
  if (views.empty()) {
    diag_.info("env_extractor_skipped", "region", "no street views available");
  } else {
    hints = furnish::vlm_assisted_placements(views, region_tags(reg), reg, network.junctions, library(), toolbox(),
                                             "region", diag_);
  }
  for (auto& p : hints.placements) {
    ++result.counts[p.category];
    result.placements.push_back(std::move(p));
  }

  json placements = json::array();
  for (const auto& p : result.placements) placements.push_back(furnish::to_json(p));
  json counts = json::object();
  for (const auto& [c, n] : result.counts) counts[std::string(furnish::to_string(c))] = n;
  json adjacency = json::array();
  for (const auto& [a, b] : hints.adjacency) adjacency.push_back({a, b});
  const auto text =
      json{{"placements", placements}, {"counts", counts}, {"adjacency", adjacency}}.dump(2) + "\n";
  write_file_atomic(store_.file("furniture.json"), text);
  store_.mark_stage("furnish", {{"placements", result.placements.size()}, {"digest", store_.put_text(text)}});
  log(fmt::format("furnish: {} placements", result.placements.size()));
}

namespace {

struct SceneInputs {
  std::vector<furnish::FurniturePlacement> furniture;
  roadnet::RoadNetwork network;
};

SceneInputs read_scene_inputs(const ArtifactStore& store) {
  SceneInputs in;
  if (std::filesystem::exists(store.file("furniture.json"))) {
    const auto j = json::parse(read_file_text(store.file("furniture.json")));
    for (const auto& p : j.at("placements")) in.furniture.push_back(furnish::placement_from_json(p));
  }
  if (std::filesystem::exists(store.file("roadnet.json")))
    in.network = roadnet::network_from_json(json::parse(read_file_text(store.file("roadnet.json"))));
  return in;
}

}  // namespace

void Pipeline::assemble() {
  require_file("region.json", RunStage::kAssemble, RunStage::kFetch);
  require_file("roadnet.json", RunStage::kAssemble, RunStage::kRoads);
  require_file("furniture.json", RunStage::kAssemble, RunStage::kFurnish);
  std::vector<scenedesign::PlacedAsset> placed;
  for (const auto& job : jobs()) {
    if (!job.terminal())
      throw Error(ErrorCode::kPrerequisite, fmt::format("stage assemble needs building {} to finish (it waits at {})",
                                                        job.building, agent::to_string(job.stage)));
    if (job.stage != Stage::kDone) continue;
    placed.push_back(scenedesign::placed_from_json(json::parse(store_.get_text(job.artifacts.at("placement")))));
  }
  auto in = read_scene_inputs(store_);
  const auto backdrop = scenedesign::BackdropAssets::load(config_.paths.ground_mesh, config_.paths.sky_mesh);
  const auto scene = scenedesign::assemble_scene(region(), std::move(placed), std::move(in.furniture),
                                                 roadnet::build_road_mesh(in.network.lanes),
                                                 std::move(in.network.agents), backdrop, diag_);
  const auto exported = scenedesign::export_scene(scene, *store_.meshes(), library());
  const auto manifest = scenedesign::to_json(exported.manifest).dump(2) + "\n";
  write_file_atomic(store_.file("scene.glb"), exported.glb);
  write_file_atomic(store_.file("scene.json"), manifest);
  store_.mark_stage("assemble", {{"nodes", exported.manifest.nodes.size()},
                                 {"buildings", exported.manifest.buildings.size()},
                                 {"scene_glb", store_.put(exported.glb)},
                                 {"scene_json", store_.put_text(manifest)}});
  log(fmt::format("assemble: {} buildings, {} nodes", exported.manifest.buildings.size(),
                  exported.manifest.nodes.size()));
}

void Pipeline::evaluate() {
  require_file("region.json", RunStage::kEvaluate, RunStage::kFetch);
  require_file("scene.json", RunStage::kEvaluate, RunStage::kAssemble);
  const auto manifest = scenedesign::manifest_from_json(json::parse(read_file_text(store_.file("scene.json"))));
  for (const auto& p : manifest.buildings) {
    if (!store_.meshes()->contains(p.asset))
      throw Error(ErrorCode::kData, fmt::format("scene.json references missing mesh {}", p.asset.digest));
  }
  auto in = read_scene_inputs(store_);
  const auto backdrop = scenedesign::BackdropAssets::load(config_.paths.ground_mesh, config_.paths.sky_mesh);
  const auto scene =
      scenedesign::assemble_scene(region(), manifest.buildings, std::move(in.furniture),
                                  roadnet::build_road_mesh(in.network.lanes), std::move(in.network.agents), backdrop,
                                  diag_);
  std::vector<std::shared_ptr<evalkit::ImageMetric>> metrics;
  for (const auto& m : config_.evaluation.metrics)
    metrics.push_back(std::make_shared<evalkit::CommandMetric>(m.name, m.command));
  evalkit::EvalOptions options;
  options.cell = config_.pipeline.raster_cell;
  options.render_size = config_.pipeline.render_size;
  evalkit::EvalInputs inputs{&scene, &region(), store_.meshes().get(), &library()};
  tools::Toolbox* judge = config_.evaluation.judge ? &toolbox() : nullptr;
  const auto report = evalkit::evaluate_scene(inputs, options, metrics, judge, diag_);
  const auto text = report.dump(2) + "\n";
  write_file_atomic(store_.file("eval_report.json"), text);
  store_.mark_stage("evaluate", {{"digest", store_.put_text(text)}});
  log("evaluate: eval_report.json written");
}

// -------------------------------------------------------------- building stages

void Pipeline::perception(BuildingJob& job) {
  const auto* fp = region().find_building(job.building);
  if (!fp) throw JobFailure("UnknownBuilding", ErrorCode::kData, "building is not in the region");
  mesh::ViewParams view;
  view.width = view.height = config_.pipeline.render_size;
  const auto scaffold = mesh::render_scaffold(mesh::extrude_prism(*fp), view);
  job.artifacts["scaffold"] = store_.put(encode_png(scaffold));

  std::vector<imagery::CuratedView> views;
  if (streetview_) {
    Diagnostics local;
    const auto points =
        imagery::plan_capture_points(*fp, region().roads, region().origin, config_.pipeline.capture, local);
    std::vector<imagery::StreetViewImage> images;
    try {
      images = imagery::fetch_street_views(points, *streetview_, job.building, local);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPerceptionUnavailable && e.code() != ErrorCode::kTransient) throw;
      local.warn("perception_degraded", job.building, e.what());
    }
    diag_.merge(local);
    if (!images.empty()) {
      imagery::CurationOptions opts;
      opts.threshold = config_.pipeline.detection_threshold;
      opts.top_k = static_cast<std::size_t>(config_.pipeline.top_k_views);
      try {
        views = imagery::curate_views(images, toolbox(), job.building, opts);
      } catch (const Error& e) {
        tool_failure("Detector", e);
      }
    }
  }
  std::vector<double> confidences;
  for (const auto& v : views) confidences.push_back(v.confidence);
  const auto decision = agent::decide(confidences, config_.pipeline);
  if (decision.action == agent::DetectionAction::kFail)
    throw JobFailure("DetectorProtocolError", ErrorCode::kProtocol, "detector confidences outside [0, 1]");
  job.degraded = decision.action == agent::DetectionAction::kDegrade;
  if (job.degraded) diag_.info("imagination_degraded", job.building, "no curated street views");
  for (std::size_t k = 0; k < decision.selected.size(); ++k)
    job.artifacts[fmt::format("view{}", k)] = store_.put(encode_png(views[decision.selected[k]].crop));
  transition(job, Stage::kImagination, {{"views", decision.selected.size()}, {"degraded", job.degraded}});
}

void Pipeline::imagination(BuildingJob& job) {
  const auto* fp = region().find_building(job.building);
  if (job.stage == Stage::kReflection) job.advance(Stage::kImagination);  // interrupted round: redo
  const auto scaffold = decode_png(store_.get(job.artifacts.at("scaffold")));
  agent::ImaginationInputs in;
  in.building = job.building;
  in.scaffold = &scaffold;
  for (int k = 0;; ++k) {
    const auto it = job.artifacts.find(fmt::format("view{}", k));
    if (it == job.artifacts.end()) break;
    in.views.push_back(decode_png(store_.get(it->second)));
  }
  in.footprint_area = geodata::footprint_area(fp->polygon);
  in.height = fp->height;

  const auto result = agent::refine_loop(std::move(in), toolbox(), config_.pipeline, [&](int k, const agent::Attempt& a) {
    const auto image = store_.put(a.image_png);
    const auto critique = store_.put_text(agent::to_json(a.report).dump());
    job.artifacts[fmt::format("attempt{}", k)] = image;
    job.artifacts[fmt::format("critique{}", k)] = critique;
    job.attempts = k;
    store_.append_ledger({{"event", "attempt"},
                          {"job", job.building},
                          {"stage", "reflection"},
                          {"attempt", k},
                          {"scores", a.report.scores},
                          {"min_score", a.report.min_score()},
                          {"image", image},
                          {"critique", critique},
                          {"request", a.request_digest}});
  });
  job.attempts = static_cast<int>(result.attempts.size());
  job.best = result.best().report;
  job.best_image = store_.put(result.best().image_png);
  job.best_effort = result.best_effort;
  transition(job, Stage::kReflection);
  transition(job, Stage::kGen3D,
             {{"accepted", result.accepted},
              {"best_effort", result.best_effort},
              {"chosen", result.chosen + 1},
              {"scores", job.best->scores},
              {"image", job.best_image}});
}

void Pipeline::gen3d(BuildingJob& job) {
  const auto image = store_.get(job.best_image);
  const json params = {{"seed", config_.seed}};
  tools::MeshRef shape, textured;
  try {
    tools::ToolRequest req{tools::ToolKind::kShapeGenerator,
                           {tools::Part::make_png(image), tools::asset_tag(job.building)}, params};
    shape = toolbox().call(std::move(req)).mesh;
  } catch (const Error& e) {
    tool_failure("ShapeGenerator", e);
  }
  job.artifacts["shape"] = shape.digest;
  try {
    tools::ToolRequest req{tools::ToolKind::kTexturePainter, {tools::Part::make_mesh(shape), tools::Part::make_png(image)},
                           params};
    textured = toolbox().call(std::move(req)).mesh;
  } catch (const Error& e) {
    tool_failure("TexturePainter", e);
  }
  job.artifacts["textured"] = textured.digest;
  transition(job, Stage::kPostProcess);
}

void Pipeline::postprocess(BuildingJob& job) {
  const auto& meshes = *store_.meshes();
  const auto raw = meshes.get({job.artifacts.at("textured")});
  Diagnostics local;
  auto cleaned = mesh::remove_outliers(mesh::remove_ground_plane(raw, {}, local));
  diag_.merge(local);
  if (cleaned.empty()) throw JobFailure("EmptyAfterCleanup", ErrorCode::kData, "post-processing removed every face");
  job.artifacts["clean"] = store_.meshes()->put(cleaned).digest;
  transition(job, Stage::kAligned,
             {{"faces_before", raw.faces.size()},
              {"faces_after", cleaned.faces.size()},
              {"ground_refused", local.count("ground_plane_refused") > 0}});
}

void Pipeline::align(BuildingJob& job) {
  const auto* fp = region().find_building(job.building);
  const tools::MeshRef ref{job.artifacts.at("clean")};
  const auto m = store_.meshes()->get(ref);
  scenedesign::AlignOptions opts;
  opts.yaw_step_deg = config_.pipeline.yaw_step;
  opts.cell = config_.pipeline.raster_cell;
  scenedesign::Alignment alignment;
  try {
    alignment = scenedesign::align_asset(m, *fp, opts, diag_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotClosed) throw JobFailure("NotClosed", e.code(), e.what());
    if (e.code() == ErrorCode::kDegenerate) throw JobFailure("Degenerate", e.code(), e.what());
    throw;
  }
  const auto placed = scenedesign::make_placed(job.building, ref, alignment, job.best_effort);
  job.artifacts["placement"] = store_.put_text(scenedesign::to_json(placed).dump());
  transition(job, Stage::kDone,
             {{"scale", placed.scale}, {"yaw", placed.yaw}, {"overlap", alignment.overlap}});
}

void Pipeline::job_stage(RunStage stage, bool strict, std::optional<std::size_t> max_jobs, RunSummary& summary) {
  require_file("region.json", stage, RunStage::kFetch);
  const Stage entry = entry_stage(stage);
  auto all = jobs();
  std::vector<BuildingJob> selected;
  for (auto& job : all) {
    if (job.stage == Stage::kFailed) continue;
    const int rank = stage_rank(job.stage);
    if (rank < static_cast<int>(entry)) {
      if (strict)
        throw Error(ErrorCode::kPrerequisite,
                    fmt::format("stage {} needs stage {} to finish for building {}", to_string(stage),
                                to_string(producer_of(job.stage)), job.building));
      continue;
    }
    if (rank == static_cast<int>(entry)) selected.push_back(std::move(job));
  }
  if (max_jobs && selected.size() > *max_jobs) selected.resize(*max_jobs);

  parallel_for(selected.size(), config_.pipeline.parallelism, [&](std::size_t i) {
    auto& job = selected[i];
    try {
      switch (stage) {
        case RunStage::kPerception: perception(job); break;
        case RunStage::kImagination: imagination(job); break;
        case RunStage::kGen3D: gen3d(job); break;
        case RunStage::kPostProcess: postprocess(job); break;
        case RunStage::kAlign: align(job); break;
        default: break;
      }
    } catch (const JobFailure& f) {
      job.failure = agent::Failure{f.cause(), f.what()};
      transition(job, Stage::kFailed, {{"cause", f.cause()}, {"message", f.what()}});
      diag_.warn("job_failed", job.building, fmt::format("{}: {}", f.cause(), f.what()));
    } catch (const Error& e) {
      const std::string cause = e.code() == ErrorCode::kNotClosed ? "NotClosed" : to_string(e.code());
      job.failure = agent::Failure{cause, e.what()};
      transition(job, Stage::kFailed, {{"cause", cause}, {"message", e.what()}});
      diag_.warn("job_failed", job.building, fmt::format("{}: {}", cause, e.what()));
    }
    store_.save_job(job);
  });
  summary.processed += selected.size();
  store_.mark_stage(std::string(to_string(stage)), {{"processed", selected.size()}});
  log(fmt::format("{}: {} jobs", to_string(stage), selected.size()));
}

// ----------------------------------------------------------------------- driver

RunSummary Pipeline::summarize() const {
  RunSummary s;
  for (const auto& job : jobs()) {
    ++s.jobs;
    if (job.stage == Stage::kDone) ++s.done;
    if (job.best_effort) ++s.best_effort;
    if (job.degraded) ++s.degraded;
    if (job.stage == Stage::kFailed) {
      ++s.failed;
      const auto code = exit_code_for_cause(job.failure ? job.failure->cause : "");
      if (s.exit == ExitCode::kOk || static_cast<int>(code) < static_cast<int>(s.exit)) s.exit = code;
    }
  }
  return s;
}

RunSummary Pipeline::run() {
  const bool complete = store_.stage_done("evaluate") && [&] {
    const auto js = jobs();
    return std::all_of(js.begin(), js.end(), [](const BuildingJob& j) { return j.terminal(); });
  }();
  if (complete) {
    auto s = summarize();
    s.already_complete = true;
    return s;
  }
  RunSummary progress;
  if (!store_.stage_done("fetch")) fetch();
  for (auto stage : kStages) {
    if (is_job_stage(stage)) job_stage(stage, false, std::nullopt, progress);
  }
  if (!store_.stage_done("roads")) roads();
  if (!store_.stage_done("furnish")) furnish();
  if (!store_.stage_done("assemble")) assemble();
  evaluate();
  auto s = summarize();
  s.processed = progress.processed;
  return s;
}

RunSummary Pipeline::run_stage(RunStage stage, std::optional<std::size_t> max_jobs) {
  RunSummary progress;
  switch (stage) {
    case RunStage::kFetch: fetch(); break;
    case RunStage::kRoads: roads(); break;
    case RunStage::kFurnish: furnish(); break;
    case RunStage::kAssemble: assemble(); break;
    case RunStage::kEvaluate: evaluate(); break;
    default: job_stage(stage, true, max_jobs, progress); break;
  }
  auto s = summarize();
  s.processed = progress.processed;
  return s;
}

}  // namespace urbangen::run
