#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/run/config.hpp"
#include "urbangen/run/pipeline.hpp"
#include "urbangen/tools/mocks.hpp"

namespace urbangen::run {
namespace {

namespace ut = urbangen::testing;
using nlohmann::json;
using tools::ToolKind;

std::string file_sha(const std::filesystem::path& p) { return sha256_hex(read_file_bytes(p)); }

TEST(RunConfigTest, FixtureFileResolvesRelativePaths) {
  const auto c = load_run_config(ut::fixture("block_config.json"));
  EXPECT_TRUE(c.paths.osm_file.is_absolute());
  EXPECT_EQ(c.paths.osm_file.filename(), "block.osm");
  EXPECT_TRUE(std::filesystem::exists(c.paths.osm_file));
  EXPECT_TRUE(c.paths.artifact_dir.is_absolute());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.traffic.seed, 7u);
  EXPECT_EQ(c.pipeline.parallelism, 2);
  for (auto t : tools::kAllTools) EXPECT_EQ(c.backends.at(t).mode, tools::BackendKind::kMock);
  // The serialized form loads back to the same thing.
  EXPECT_EQ(to_json(run_config_from_json(to_json(c), "/")), to_json(c));
}

TEST(RunConfigTest, RejectsBadInput) {
  const json base = to_json(ut::block_config(ut::fixture("unused")));
  auto expect_config_error = [&](json j, const std::string& what) {
    try {
      run_config_from_json(j, "/").validate();
      ADD_FAILURE() << what;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig) << what;
    }
  };
  json j = base;
  j["colour"] = "red";
  expect_config_error(j, "unknown key");
  j = base;
  j["backends"]["painter"] = "mock";
  expect_config_error(j, "unknown tool");
  j = base;
  j["backends"]["judge"] = "cloud";
  expect_config_error(j, "unknown backend");
  j = base;
  j["backends"]["judge"] = "live";
  expect_config_error(j, "live without endpoint");
  j = base;
  j["pipeline"]["accept_threshold"] = 9;
  expect_config_error(j, "threshold");
  j = base;
  j["paths"].erase("osm_file");
  expect_config_error(j, "no OSM source");
  EXPECT_THROW(load_run_config(ut::fixture("missing.json")), Error);
}

TEST(RunConfigTest, BboxAndOverrides) {
  const auto b = parse_bbox(" 1.5,2,3,4.25 ");
  EXPECT_DOUBLE_EQ(b.min.lat, 1.5);
  EXPECT_DOUBLE_EQ(b.max.lon, 4.25);
  for (const char* bad : {"1,2,3", "3,2,1,4", "a,b,c,d", "1,2,3,4,5", "-91,0,0,1"}) EXPECT_THROW(parse_bbox(bad), Error) << bad;

  auto c = ut::block_config("/tmp/x");
  apply_backend_override(c, "all=replay");
  for (auto t : tools::kAllTools) EXPECT_EQ(c.backends.at(t).mode, tools::BackendKind::kReplay);
  apply_backend_override(c, "judge=mock");
  EXPECT_EQ(c.backends.at(ToolKind::kJudge).mode, tools::BackendKind::kMock);
  EXPECT_THROW(apply_backend_override(c, "judge"), Error);
  EXPECT_THROW(apply_backend_override(c, "oracle=mock"), Error);
  set_seed(c, 99);
  EXPECT_EQ(c.pipeline.seed, 99u);
  EXPECT_EQ(c.traffic.seed, 99u);
}

TEST(Ledger, CorruptionIsRefused) {
  ut::TempDir dir("ledger");
  {
    ArtifactStore store(dir.path());
    store.append_ledger({{"event", "planned"}});
    store.append_ledger({{"event", "transition"}});
    const auto entries = store.read_ledger();
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_TRUE(entries[0].contains("time"));
  }
  {
    std::ofstream out(dir / "jobs.jsonl", std::ios::app);
    out << "{\"event\": \"trunc";  // a write cut short
  }
  ArtifactStore store(dir.path());
  try {
    store.read_ledger();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptLedger);
  }
  write_file_atomic(dir / "jobs.jsonl", std::string("{}\n[1]\n"));
  EXPECT_THROW(store.read_ledger(), Error);

  // A pipeline will not open on top of it.
  auto c = ut::block_config(dir.path());
  EXPECT_THROW(Pipeline p(c), Error);
}

TEST(Store, BlobsAreContentAddressed) {
  ut::TempDir dir("blobs");
  ArtifactStore store(dir.path());
  const auto d = store.put_text("hello");
  EXPECT_EQ(d, sha256_hex(std::string_view("hello")));
  EXPECT_EQ(store.put_text("hello"), d);
  EXPECT_EQ(store.get_text(d), "hello");
  EXPECT_TRUE(store.contains(d));
  EXPECT_FALSE(store.contains("nope"));
  EXPECT_THROW(store.get(std::string(64, '0')), Error);
  EXPECT_THROW(store.get("../../etc/passwd"), Error);
}

TEST(Pipeline, StageNamesAndExitCodes) {
  for (auto s : all_run_stages()) EXPECT_EQ(run_stage_from_string(to_string(s)), s);
  EXPECT_THROW(run_stage_from_string("paint"), Error);
  EXPECT_TRUE(is_job_stage(RunStage::kGen3D));
  EXPECT_FALSE(is_job_stage(RunStage::kRoads));
  EXPECT_EQ(exit_code_for_cause("ImaginerUnavailable"), ExitCode::kTool);
  EXPECT_EQ(exit_code_for_cause("CriticProtocolError"), ExitCode::kTool);
  EXPECT_EQ(exit_code_for_cause("NotClosed"), ExitCode::kData);
}

TEST(Pipeline, PrerequisitesAreNamed) {
  ut::TempDir dir("prereq");
  Pipeline p(ut::block_config(dir / "run"));
  for (auto stage : {RunStage::kPerception, RunStage::kRoads, RunStage::kAssemble, RunStage::kEvaluate}) {
    try {
      p.run_stage(stage);
      FAIL() << to_string(stage);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kPrerequisite) << to_string(stage);
    }
  }
  p.run_stage(RunStage::kFetch);
  // Jobs exist but none has reached Gen3D.
  EXPECT_THROW(p.run_stage(RunStage::kGen3D), Error);
  EXPECT_THROW(p.run_stage(RunStage::kAssemble), Error);
  EXPECT_NO_THROW(p.run_stage(RunStage::kRoads));
  EXPECT_THROW(Pipeline::open(dir / "elsewhere"), Error);
}

TEST(Pipeline, DifferentConfigIsRefused) {
  ut::TempDir dir("mismatch");
  auto c = ut::block_config(dir / "run");
  { Pipeline p(c); }
  { Pipeline same(c); }
  set_seed(c, 8);
  try {
    Pipeline p(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

// Counts imaginer calls per pipeline instance.
std::shared_ptr<tools::MockBackend> counting_imaginer() {
  return std::make_shared<tools::MockBackend>(tools::mocks::imaginer());
}

TEST(Pipeline, InterruptedRunResumesWithoutRepeatingWork) {
  ut::TempDir dir("resume");
  const auto c_full = ut::block_config(dir / "full");
  std::string full_scene, full_report;
  {
    Pipeline p(c_full);
    const auto s = p.run();
    ASSERT_EQ(s.exit, ExitCode::kOk);
    EXPECT_EQ(s.done, ut::kBlockBuildings);
    full_scene = file_sha(dir / "full" / "scene.glb");
    full_report = file_sha(dir / "full" / "eval_report.json");
  }

  const auto c = ut::block_config(dir / "cut");
  {
    Pipeline p(c);
    auto imaginer = counting_imaginer();
    p.override_backend(ToolKind::kImaginer, imaginer);
    p.run_stage(RunStage::kFetch);
    p.run_stage(RunStage::kPerception);
    const auto s = p.run_stage(RunStage::kImagination, 6);
    EXPECT_EQ(s.processed, 6u);
    EXPECT_EQ(imaginer->calls(), 6u);
  }
  {
    auto p = Pipeline::open(dir / "cut");
    auto imaginer = counting_imaginer();
    p->override_backend(ToolKind::kImaginer, imaginer);
    const auto s = p->run();
    EXPECT_EQ(s.exit, ExitCode::kOk);
    EXPECT_EQ(s.done, ut::kBlockBuildings);
    EXPECT_EQ(imaginer->calls(), ut::kBlockBuildings - 6);
  }
  EXPECT_EQ(file_sha(dir / "cut" / "scene.glb"), full_scene);
  EXPECT_EQ(file_sha(dir / "cut" / "eval_report.json"), full_report);

  // A third invocation finds nothing to do.
  auto p = Pipeline::open(dir / "cut");
  auto imaginer = counting_imaginer();
  p->override_backend(ToolKind::kImaginer, imaginer);
  const auto ledger_before = p->store().read_ledger().size();
  const auto s = p->run();
  EXPECT_TRUE(s.already_complete);
  EXPECT_EQ(imaginer->calls(), 0u);
  EXPECT_EQ(p->store().read_ledger().size(), ledger_before);
}

TEST(Pipeline, LedgerRecordsEveryTransition) {
  ut::TempDir dir("transitions");
  Pipeline p(ut::block_config(dir / "run"));
  p.run();
  std::map<std::string, std::vector<std::string>> path;
  for (const auto& e : p.store().read_ledger())
    if (e.value("event", "") == "transition") path[e["job"]].push_back(e["stage"]);
  ASSERT_EQ(path.size(), ut::kBlockBuildings);
  const std::vector<std::string> expected{"imagination", "reflection", "gen3d", "postprocess", "aligned", "done"};
  for (const auto& [job, stages] : path) EXPECT_EQ(stages, expected) << job;
  for (const auto& j : p.jobs()) {
    EXPECT_EQ(j.stage, agent::Stage::kDone);
    EXPECT_TRUE(j.degraded);  // no street-view source configured
  }
}

TEST(Pipeline, StreetViewImageryFeedsImagination) {
  ut::TempDir dir("streetview");
  Pipeline p(ut::block_config(dir / "run"));
  p.set_streetview_client(std::make_shared<ut::SyntheticStreetView>());
  p.run_stage(RunStage::kFetch);
  const auto s = p.run_stage(RunStage::kPerception);
  EXPECT_EQ(s.degraded, 0u);
  std::vector<std::size_t> parts;
  p.toolbox().set_observer([&](const tools::ToolRequest& r, const tools::CacheKey&, const tools::ToolResponse&) {
    if (r.tool == ToolKind::kImaginer) parts.push_back(r.parts.size());
  });
  for (const auto& j : p.jobs()) {
    EXPECT_FALSE(j.degraded) << j.building;
    EXPECT_TRUE(j.artifacts.count("view0")) << j.building;
  }
  p.run_stage(RunStage::kImagination, 1);
  // Scaffold, at least one curated view, and the prompt text.
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_GE(parts[0], 3u);
}

}  // namespace
}  // namespace urbangen::run
