#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "test_support.hpp"
#include "urbangen/common/assets.hpp"
#include "urbangen/common/base64.hpp"
#include "urbangen/common/error.hpp"
#include "urbangen/common/hash.hpp"
#include "urbangen/mesh/io.hpp"
#include "urbangen/tools/backend.hpp"
#include "urbangen/tools/mocks.hpp"
#include "urbangen/tools/toolbox.hpp"

namespace urbangen::tools {
namespace {

namespace ut = urbangen::testing;
using nlohmann::json;

ToolRequest text_request(ToolKind tool, std::string text, json params = json::object()) {
  ToolRequest r;
  r.tool = tool;
  r.parts.push_back(Part::make_text(std::move(text)));
  r.params = std::move(params);
  return r;
}

mesh::Mesh unit_box() {
  const std::vector<Vec2> ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  return mesh::extrude_ring(ring, 0, 1);
}

// Digest frozen from an independent computation (Python hashlib over the
// documented layout).
TEST(Canonicalize, DigestIsPinned) {
  const auto key = canonicalize(text_request(ToolKind::kJudge, "hello", {{"temperature", 0.0}}));
  EXPECT_EQ(key.digest, "0e7de4dd291aa08e49deadf0f1ad7eea7f7d74f97311c6e8e72e0dd0be927ebc");
}

TEST(Canonicalize, ParamOrderDoesNotMatterButValuesDo) {
  json a = json::object(), b = json::object();
  a["top_p"] = 0.5;
  a["temperature"] = 0.1;
  b["temperature"] = 0.1;
  b["top_p"] = 0.5;
  EXPECT_EQ(canonicalize(text_request(ToolKind::kCritic, "x", a)), canonicalize(text_request(ToolKind::kCritic, "x", b)));
  b["top_p"] = 0.6;
  EXPECT_NE(canonicalize(text_request(ToolKind::kCritic, "x", a)), canonicalize(text_request(ToolKind::kCritic, "x", b)));
  EXPECT_NE(canonicalize(text_request(ToolKind::kCritic, "x", a)), canonicalize(text_request(ToolKind::kJudge, "x", a)));
  // Part boundaries are part of the key.
  ToolRequest split = text_request(ToolKind::kJudge, "ab");
  ToolRequest two = text_request(ToolKind::kJudge, "a");
  two.parts.push_back(Part::make_text("b"));
  EXPECT_NE(canonicalize(split), canonicalize(two));
}

TEST(Request, ValidateEnforcesWhitelist) {
  EXPECT_NO_THROW(text_request(ToolKind::kImaginer, "x", {{"seed", 3}}).validate());
  EXPECT_THROW(text_request(ToolKind::kImaginer, "x", {{"labels", 3}}).validate(), Error);
  EXPECT_THROW(text_request(ToolKind::kImaginer, "x", json::array()).validate(), Error);
  ToolRequest empty;
  EXPECT_THROW(empty.validate(), Error);
  EXPECT_THROW(tool_from_string("painter"), Error);
  EXPECT_THROW(backend_from_string("cloud"), Error);
  for (auto t : kAllTools) EXPECT_EQ(tool_from_string(to_string(t)), t);
}

TEST(Response, SerializationRoundTrip) {
  auto r = ToolResponse::make_record({{"a", 1}});
  r.latency_ms = 12;
  const auto back = ToolResponse::deserialize(r.serialize());
  EXPECT_EQ(back.type, Modality::kRecord);
  EXPECT_EQ(back.record, r.record);
  EXPECT_EQ(r.serialize(), ToolResponse::make_record({{"a", 1}}).serialize());
  EXPECT_THROW(ToolResponse::deserialize(std::vector<std::uint8_t>{1, 2}), Error);
}

TEST(MeshStoreTest, ContentAddressedAndPersistent) {
  ut::TempDir dir("meshes");
  MeshRef ref;
  {
    MeshStore store(dir.path());
    ref = store.put(unit_box());
    EXPECT_EQ(ref, store.put(unit_box()));
    EXPECT_EQ(ref.digest, sha256_hex(store.get_glb(ref)));
  }
  MeshStore reopened(dir.path());
  ASSERT_TRUE(reopened.contains(ref));
  EXPECT_EQ(reopened.get(ref).faces, unit_box().faces);
  MeshStore memory;
  EXPECT_FALSE(memory.contains(ref));
  EXPECT_THROW(memory.get(ref), Error);
}

TEST(Toolbox, DefaultsMergeUnderRequestParams) {
  Toolbox box;
  const auto prepared = box.prepare(text_request(ToolKind::kCritic, "x", {{"top_p", 0.5}}));
  EXPECT_EQ(prepared.params["temperature"], 0.6);
  EXPECT_EQ(prepared.params["top_p"], 0.5);
}

TEST(Toolbox, MissingBackendAndModalityMismatch) {
  Toolbox box;
  EXPECT_THROW(box.call(text_request(ToolKind::kJudge, "x")), Error);
  box.set_backend(ToolKind::kJudge, std::make_shared<MockBackend>(
                                        [](const ToolRequest&, const CacheKey&, MeshStore&) { return ToolResponse::make_record({}); }));
  try {
    box.call(text_request(ToolKind::kJudge, "x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
  }
  EXPECT_EQ(box.call_count(ToolKind::kJudge), 1u);
}

TEST(Replay, MissNamesTheDigest) {
  ut::TempDir dir("replay");
  Toolbox box;
  box.set_backend(ToolKind::kJudge, std::make_shared<ReplayBackend>(std::make_shared<ReplayCache>(dir.path())));
  const auto req = text_request(ToolKind::kJudge, "unseen");
  try {
    box.call(req);
    FAIL();
  } catch (const ReplayMiss& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReplayMiss);
    EXPECT_EQ(e.digest(), box.key_for(req).digest);
  }
}

TEST(Replay, RecordThenReplayIsIdentical) {
  ut::TempDir dir("record");
  auto cache = std::make_shared<ReplayCache>(dir / "cache");
  const std::vector<ToolRequest> reqs{text_request(ToolKind::kJudge, "q1"), text_request(ToolKind::kShapeGenerator, "w3")};

  Toolbox rec;
  rec.set_backend(ToolKind::kJudge, std::make_shared<RecordingBackend>(std::make_shared<MockBackend>(mocks::judge()), cache));
  rec.set_backend(ToolKind::kShapeGenerator,
                  std::make_shared<RecordingBackend>(std::make_shared<MockBackend>(mocks::shape_from_region(nullptr)), cache));
  std::vector<ToolResponse> first;
  for (const auto& r : reqs) first.push_back(rec.call(r));

  // A fresh mesh store proves meshes travel with the cache.
  Toolbox play(std::make_shared<MeshStore>(dir / "fresh"));
  for (auto t : {ToolKind::kJudge, ToolKind::kShapeGenerator}) play.set_backend(t, std::make_shared<ReplayBackend>(cache));
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto again = play.call(reqs[i]);
    EXPECT_EQ(again.serialize(), first[i].serialize());
    EXPECT_EQ(again.backend, BackendKind::kReplay);
  }
  EXPECT_EQ(play.meshes().get(first[1].mesh).vertices, rec.meshes().get(first[1].mesh).vertices);
  EXPECT_EQ(play.network_calls(), 0u);
}

// Local stand-in for a tool endpoint.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/tool", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/tool"; }
  std::atomic<int> hits{0};

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RetryPolicy fast_retry() { return {3, std::chrono::milliseconds(1)}; }

TEST(Live, RetriesTransientFailuresThenSucceeds) {
  std::atomic<int> n{0};
  json seen;
  FakeEndpoint ep([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    if (++n < 3) {
      res.status = 503;
      return;
    }
    res.set_content(json{{"type", "text"}, {"text", "FIRST"}}.dump(), "application/json");
  });
  ut::TempDir dir("live");
  auto cache = std::make_shared<ReplayCache>(dir.path());
  Toolbox box;
  box.set_backend(ToolKind::kJudge, std::make_shared<LiveBackend>(LiveEndpoint{ep.url(), "", 5}, fast_retry(), cache));
  const auto req = text_request(ToolKind::kJudge, "which?");
  EXPECT_EQ(box.call(req).text, "FIRST");
  EXPECT_EQ(ep.hits.load(), 3);
  EXPECT_EQ(box.network_calls(), 3u);
  EXPECT_EQ(seen["tool"], "judge");
  EXPECT_EQ(seen["parts"][0]["text"], "which?");
  // The exchange was recorded for offline replay.
  EXPECT_TRUE(cache->contains(box.key_for(req)));
}

TEST(Live, ExhaustionAndClientErrorsAreUnavailable) {
  FakeEndpoint down([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  auto backend = std::make_shared<LiveBackend>(LiveEndpoint{down.url(), "", 5}, fast_retry());
  Toolbox box;
  box.set_backend(ToolKind::kJudge, backend);
  try {
    box.call(text_request(ToolKind::kJudge, "x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kToolUnavailable);
  }
  EXPECT_EQ(down.hits.load(), 3);

  FakeEndpoint reject([](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  box.set_backend(ToolKind::kJudge, std::make_shared<LiveBackend>(LiveEndpoint{reject.url(), "", 5}, fast_retry()));
  EXPECT_THROW(box.call(text_request(ToolKind::kJudge, "x")), Error);
  EXPECT_EQ(reject.hits.load(), 1);
}

TEST(Live, MalformedBodiesAreProtocolErrors) {
  for (const std::string body : {"not json", R"({"type":"image","png_base64":"AAAA"})", R"({"type":"video"})",
                                 R"({"type":"text"})"}) {
    FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) { res.set_content(body, "application/json"); });
    Toolbox box;
    box.set_backend(ToolKind::kImaginer, std::make_shared<LiveBackend>(LiveEndpoint{ep.url(), "", 5}, fast_retry()));
    try {
      box.call(text_request(ToolKind::kImaginer, "x"));
      FAIL() << body;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProtocol) << body;
    }
    EXPECT_EQ(ep.hits.load(), 1);
  }
}

TEST(Live, MeshResponsesLandInTheStore) {
  const auto glb = mesh::export_glb(std::vector<mesh::SceneNode>{{"m", std::make_shared<const mesh::Mesh>(unit_box())}});
  FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"type", "mesh"}, {"glb_base64", base64_encode(glb)}}.dump(), "application/json");
  });
  Toolbox box;
  box.set_backend(ToolKind::kShapeGenerator, std::make_shared<LiveBackend>(LiveEndpoint{ep.url(), "", 5}, fast_retry()));
  const auto r = box.call(text_request(ToolKind::kShapeGenerator, "w1"));
  EXPECT_EQ(r.mesh.digest, sha256_hex(glb));
  EXPECT_EQ(box.meshes().get(r.mesh).faces, unit_box().faces);
}

TEST(Mocks, CriticSequenceAdvancesPerRubric) {
  auto script = mocks::critic_sequence({{1, 2, 3}, {4, 5, 6}});
  MeshStore store;
  const auto prompt = [](const char* name) {
    return text_request(ToolKind::kCritic, std::string(assets::get(name)));
  };
  const auto sanity = prompt("prompts/critic_structure_sanity.txt");
  const auto align = prompt("prompts/critic_structural_alignment.txt");
  EXPECT_EQ(mocks::rubric_of(align), mocks::Rubric::kStructuralAlignment);
  EXPECT_EQ(script(sanity, {}, store).record["score"], 1);
  EXPECT_EQ(script(align, {}, store).record["score"], 3);
  EXPECT_EQ(script(sanity, {}, store).record["score"], 4);
  EXPECT_EQ(script(sanity, {}, store).record["score"], 4);  // the last row repeats
  EXPECT_THROW(mocks::rubric_of(text_request(ToolKind::kCritic, "rate this")), Error);
}

}  // namespace
}  // namespace urbangen::tools
