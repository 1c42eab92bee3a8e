#include "urbangen/run/store.hpp"

#include <chrono>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "urbangen/common/error.hpp"
#include "urbangen/common/fs.hpp"
#include "urbangen/common/hash.hpp"

namespace urbangen::run {

using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)), ms);
}

bool is_digest(const std::string& d) {
  return d.size() == 64 && d.find_first_not_of("0123456789abcdef") == std::string::npos;
}

}  // namespace

ArtifactStore::ArtifactStore(std::filesystem::path root)
    : root_(std::move(root)), meshes_(std::make_shared<tools::MeshStore>(root_ / "meshes")) {
  std::filesystem::create_directories(root_ / "blobs");
  std::filesystem::create_directories(root_ / "jobs");
  std::filesystem::create_directories(root_ / "stages");
}

std::filesystem::path ArtifactStore::blob_path(const std::string& digest) const {
  if (!is_digest(digest)) throw Error(ErrorCode::kData, fmt::format("'{}' is not a blob digest", digest));
  return root_ / "blobs" / digest.substr(0, 2) / digest;
}

std::string ArtifactStore::put(std::span<const std::uint8_t> bytes) {
  const auto digest = sha256_hex(bytes);
  const auto path = blob_path(digest);
  if (!std::filesystem::exists(path)) {
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, bytes);
  }
  return digest;
}

std::string ArtifactStore::put_text(std::string_view text) {
  return put(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> ArtifactStore::get(const std::string& digest) const {
  const auto path = blob_path(digest);
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kData, fmt::format("blob {} is missing", digest));
  return read_file_bytes(path);
}

std::string ArtifactStore::get_text(const std::string& digest) const {
  const auto bytes = get(digest);
  return {bytes.begin(), bytes.end()};
}

bool ArtifactStore::contains(const std::string& digest) const {
  return is_digest(digest) && std::filesystem::exists(blob_path(digest));
}

void ArtifactStore::save_job(const agent::BuildingJob& job) {
  const auto dir = root_ / "jobs" / job.building;
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "state.json", agent::to_json(job).dump(2) + "\n");
}

std::optional<agent::BuildingJob> ArtifactStore::load_job(const std::string& building) const {
  const auto path = root_ / "jobs" / building / "state.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return agent::job_from_json(json::parse(read_file_text(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptLedger, fmt::format("job state {} is unreadable: {}", path.string(), e.what()));
  }
}

void ArtifactStore::append_ledger(json entry) {
  entry["time"] = utc_now();
  const auto line = entry.dump() + "\n";
  std::lock_guard lock(ledger_mutex_);
  std::ofstream out(root_ / "jobs.jsonl", std::ios::app | std::ios::binary);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot append to the run ledger");
}

std::vector<json> ArtifactStore::read_ledger() const {
  std::lock_guard lock(ledger_mutex_);
  const auto path = root_ / "jobs.jsonl";
  if (!std::filesystem::exists(path)) return {};
  const auto text = read_file_text(path);
  if (!text.empty() && text.back() != '\n')
    throw Error(ErrorCode::kCorruptLedger, "run ledger ends in a partial line");
  std::vector<json> out;
  std::size_t start = 0, line_no = 1;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    try {
      out.push_back(json::parse(text.substr(start, end - start)));
    } catch (const json::exception&) {
      throw Error(ErrorCode::kCorruptLedger, fmt::format("run ledger line {} is not valid JSON", line_no));
    }
    if (!out.back().is_object())
      throw Error(ErrorCode::kCorruptLedger, fmt::format("run ledger line {} is not an object", line_no));
    start = end + 1;
    ++line_no;
  }
  return out;
}

void ArtifactStore::mark_stage(const std::string& stage, const json& info) {
  write_file_atomic(root_ / "stages" / (stage + ".json"), info.dump(2) + "\n");
}

bool ArtifactStore::stage_done(const std::string& stage) const {
  return std::filesystem::exists(root_ / "stages" / (stage + ".json"));
}

void ArtifactStore::clear_stage(const std::string& stage) {
  std::error_code ec;
  std::filesystem::remove(root_ / "stages" / (stage + ".json"), ec);
}

}  // namespace urbangen::run
