#include "metajudge/cache.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "metajudge/digest.hpp"
#include "metajudge/errors.hpp"

namespace metajudge::cache {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string digest_from_fields(const std::string& model_id, const std::string& template_id,
                               const std::string& template_version,
                               const std::string& temperature_text,
                               const std::string& instruction, const std::string& output) {
  return sha256_hex_fields(
      {model_id, template_id, template_version, temperature_text, instruction, output});
}

std::string entry_checksum(const std::string& key_digest, const std::string& text) {
  return sha256_hex_fields({key_digest, text});
}

std::string utc_now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_hex_shard_name(const std::string& name) {
  return name.size() == 2 && std::isxdigit(static_cast<unsigned char>(name[0])) &&
         std::isxdigit(static_cast<unsigned char>(name[1]));
}

// Parses an entry file and checks its internal consistency against the digest
// implied by its filename. Returns the cached text, or an error description.
struct EntryCheck {
  std::optional<std::string> text;
  std::string problem;
};

EntryCheck check_entry(const fs::path& path, const std::string& expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {std::nullopt, path.string() + ": unreadable"};
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    return {std::nullopt, path.string() + ": not a JSON object"};

  try {
    const json& key = doc.at("key");
    std::string recomputed = digest_from_fields(
        key.at("model_id").get<std::string>(), key.at("template_id").get<std::string>(),
        key.at("template_version").get<std::string>(),
        key.at("temperature").get<std::string>(), key.at("instruction").get<std::string>(),
        key.at("output").get<std::string>());
    std::string text = doc.at("text").get<std::string>();
    std::string checksum = doc.at("checksum").get<std::string>();
    if (recomputed != expected_digest)
      return {std::nullopt, path.string() + ": key fields do not match the entry name"};
    if (entry_checksum(recomputed, text) != checksum)
      return {std::nullopt, path.string() + ": checksum mismatch"};
    return {std::move(text), ""};
  } catch (const json::exception& e) {
    return {std::nullopt, path.string() + ": missing field (" + e.what() + ")"};
  }
}

}  // namespace

std::string ReasoningKey::digest() const {
  return digest_from_fields(model_id, template_id, template_version,
                            canonical_double(temperature), instruction, output);
}

struct ReasoningStore::Flight {
  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  std::string result;
  std::exception_ptr error;
};

ReasoningStore::ReasoningStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path ReasoningStore::entry_path(const std::string& digest) const {
  return root_ / digest.substr(0, 2) / (digest + ".json");
}

fs::path ReasoningStore::anomaly_log_path() const { return root_ / "anomalies.log"; }

fs::path ReasoningStore::run_log_path() const { return root_ / "last_run.json"; }

void ReasoningStore::write_run_log() const {
  json doc;
  doc["hits"] = run_hits_.load();
  doc["misses"] = run_misses_.load();
  doc["written_at"] = utc_now_iso8601();
  std::ofstream out(run_log_path(), std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("write_failed", "cannot write " + run_log_path().string());
  out << doc.dump(2) << "\n";
}

void ReasoningStore::log_anomaly(const std::string& message) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(anomaly_log_path(), std::ios::app);
  out << utc_now_iso8601() << " " << message << "\n";
}

std::optional<std::string> ReasoningStore::get(const ReasoningKey& key) const {
  std::string dg = key.digest();
  fs::path path = entry_path(dg);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  EntryCheck check = check_entry(path, dg);
  if (!check.text) {
    log_anomaly("corrupt entry treated as miss: " + check.problem);
    return std::nullopt;
  }
  return check.text;
}

void ReasoningStore::put(const ReasoningKey& key, const std::string& text) {
  std::string dg = key.digest();
  fs::path path = entry_path(dg);

  EntryCheck previous{std::nullopt, ""};
  std::error_code ec;
  if (fs::exists(path, ec)) previous = check_entry(path, dg);
  if (previous.text && *previous.text == text) return;  // idempotent re-put
  if (previous.text && *previous.text != text)
    log_anomaly("overwriting entry " + dg + " with differing text (last write wins)");

  json doc;
  doc["key"] = json{{"model_id", key.model_id},
                    {"template_id", key.template_id},
                    {"template_version", key.template_version},
                    {"temperature", canonical_double(key.temperature)},
                    {"instruction", key.instruction},
                    {"output", key.output}};
  doc["text"] = text;
  doc["created_at"] = utc_now_iso8601();
  doc["checksum"] = entry_checksum(dg, text);

  fs::create_directories(path.parent_path());
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("write_failed", "cannot write " + tmp.string());
    out << doc.dump(2) << "\n";
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw StoreError("write_failed", "cannot move entry into place: " + ec.message());
  }
}

std::string ReasoningStore::get_or_compute(const ReasoningKey& key,
                                           const std::function<std::string()>& compute) {
  std::string dg = key.digest();

  std::shared_ptr<Flight> flight;
  bool leader = false;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = flights_.find(dg);
    if (it != flights_.end()) {
      flight = it->second;
    } else {
      flight = std::make_shared<Flight>();
      flights_[dg] = flight;
      leader = true;
    }
  }

  if (!leader) {
    std::unique_lock<std::mutex> lock(flight->mu);
    flight->cv.wait(lock, [&] { return flight->done; });
    if (flight->error) std::rethrow_exception(flight->error);
    run_hits_.fetch_add(1);  // served by the in-flight leader, no extra call
    return flight->result;
  }

  std::string result;
  std::exception_ptr error;
  try {
    if (auto cached = get(key)) {
      run_hits_.fetch_add(1);
      result = *cached;
    } else {
      run_misses_.fetch_add(1);
      result = compute();
      put(key, result);
    }
  } catch (...) {
    error = std::current_exception();
  }

  {
    std::lock_guard<std::mutex> lock(mu_);
    flights_.erase(dg);
  }
  {
    std::lock_guard<std::mutex> lock(flight->mu);
    flight->done = true;
    flight->result = result;
    flight->error = error;
  }
  flight->cv.notify_all();
  if (error) std::rethrow_exception(error);
  return result;
}

CacheStats ReasoningStore::stats() const {
  CacheStats out;
  std::error_code ec;
  for (const auto& shard : fs::directory_iterator(root_, ec)) {
    if (!shard.is_directory() || !is_hex_shard_name(shard.path().filename().string()))
      continue;
    ++out.shards;
    for (const auto& entry : fs::directory_iterator(shard.path())) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      ++out.entries;
      out.bytes += entry.file_size();
    }
  }
  if (fs::exists(run_log_path(), ec)) {
    std::ifstream in(run_log_path(), std::ios::binary);
    json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_object() && doc.contains("hits") && doc.contains("misses")) {
      out.last_run_hits = doc["hits"].get<std::size_t>();
      out.last_run_misses = doc["misses"].get<std::size_t>();
    }
  }
  return out;
}

std::size_t ReasoningStore::verify(std::vector<std::string>* problems) const {
  std::size_t bad = 0;
  std::error_code ec;
  for (const auto& shard : fs::directory_iterator(root_, ec)) {
    if (!shard.is_directory() || !is_hex_shard_name(shard.path().filename().string()))
      continue;
    for (const auto& entry : fs::directory_iterator(shard.path())) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      std::string dg = entry.path().stem().string();
      EntryCheck check = check_entry(entry.path(), dg);
      if (!check.text) {
        ++bad;
        if (problems) problems->push_back(check.problem);
      }
    }
  }
  return bad;
}

std::size_t ReasoningStore::purge() {
  std::size_t removed = 0;
  std::error_code ec;
  std::vector<fs::path> shards;
  for (const auto& shard : fs::directory_iterator(root_, ec)) {
    if (!shard.is_directory() || !is_hex_shard_name(shard.path().filename().string()))
      continue;
    shards.push_back(shard.path());
  }
  for (const auto& shard : shards) {
    for (const auto& entry : fs::directory_iterator(shard)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") ++removed;
    }
    fs::remove_all(shard);
  }
  fs::remove(run_log_path(), ec);
  if (removed > 0) log_anomaly("purged " + std::to_string(removed) + " entries");
  return removed;
}

}  // namespace metajudge::cache
