#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace metajudge::cache {

// Identity of one cached reasoning text: every field that can change what the
// model writes. Instruction-only artifacts (generated evaluation criteria)
// leave `output` empty.
struct ReasoningKey {
  std::string model_id;
  std::string template_id;
  std::string template_version;
  double temperature = 0.0;
  std::string instruction;
  std::string output;

  // SHA-256 over the length-prefixed fields; the temperature is folded in via
  // its shortest round-trip decimal form so 0.7 keys identically everywhere.
  std::string digest() const;

  bool operator==(const ReasoningKey&) const = default;
};

struct CacheStats {
  std::size_t entries = 0;
  std::size_t shards = 0;
  std::uintmax_t bytes = 0;
  // Hit/miss counters persisted by the most recent evaluation run, if any.
  std::optional<std::size_t> last_run_hits;
  std::optional<std::size_t> last_run_misses;
};

// Content-addressed, file-per-entry store under a root directory, sharded by
// the first two hex characters of the key digest. Entries embed their key
// fields in clear plus a checksum, so the store can be audited offline.
//
// Concurrency: safe for concurrent use from multiple threads. get_or_compute
// coalesces concurrent misses on the same key into a single computation.
class ReasoningStore {
 public:
  explicit ReasoningStore(std::filesystem::path root);

  // Returns the cached text, or nullopt on miss. A corrupt entry counts as a
  // miss and is recorded in the anomaly log.
  std::optional<std::string> get(const ReasoningKey& key) const;

  // Idempotent for identical text. Differing text under the same key wins
  // (last write) and is recorded in the anomaly log.
  void put(const ReasoningKey& key, const std::string& text);

  // get(), falling back to compute()+put(). Concurrent callers with the same
  // key share one compute() invocation (and its exception, if any).
  std::string get_or_compute(const ReasoningKey& key,
                             const std::function<std::string()>& compute);

  CacheStats stats() const;

  // Checks every entry (name matches key digest, checksum matches payload).
  // Returns the number of bad entries; descriptions go to `problems`.
  std::size_t verify(std::vector<std::string>* problems = nullptr) const;

  // Deletes every entry in the store; returns how many were removed.
  std::size_t purge();

  // Hit/miss counters for the current process, updated by get_or_compute.
  std::size_t run_hits() const { return run_hits_.load(); }
  std::size_t run_misses() const { return run_misses_.load(); }

  // Persists the current counters so `cache stats` can report them later.
  void write_run_log() const;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path anomaly_log_path() const;
  std::filesystem::path run_log_path() const;

 private:
  struct Flight;

  std::filesystem::path entry_path(const std::string& digest) const;
  void log_anomaly(const std::string& message) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Flight>> flights_;
  mutable std::atomic<std::size_t> run_hits_{0};
  mutable std::atomic<std::size_t> run_misses_{0};
};

}  // namespace metajudge::cache
