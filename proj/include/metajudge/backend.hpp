#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <condition_variable>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "metajudge/clock.hpp"
#include "metajudge/errors.hpp"

namespace metajudge::backend {

// ---------------------------------------------------------------------------
// Profiles and wire types
// ---------------------------------------------------------------------------

struct BackendProfile {
  std::string name;
  std::string endpoint;  // base URL, e.g. "https://api.openai.com/v1"
  std::string model_id;
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env;
  bool supports_token_probabilities = false;
  int max_in_flight = 4;
  int requests_per_minute = 600;
  int retry_limit = 3;

  void validate() const;
};

enum class Role { System, User };

struct ChatMessage {
  Role role = Role::User;
  std::string text;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  bool want_token_probabilities = false;
  int top_k_probabilities = 20;
  /// Diagnostic label (e.g. the phase name); never sent on the wire.
  std::string tag;

  /// All message text joined in order; scripted rule predicates match this.
  std::string rendered_text() const;

  void validate(const BackendProfile& profile) const;
};

struct TokenCandidate {
  std::string token;
  double logprob = 0.0;  // natural log, <= 0
};

/// Top-k alternatives for one generated token position, sorted by
/// descending log-probability. candidates[0] is the emitted token under
/// deterministic decoding.
struct TokenPosition {
  int position = 0;
  std::vector<TokenCandidate> candidates;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::optional<std::vector<TokenPosition>> token_probabilities;
  Usage usage;
  double latency_ms = 0.0;
};

/// One request/response pair, recorded verbatim for every call and attached
/// to the judged sample for auditability.
struct ChatExchange {
  ChatRequest request;
  ChatResponse response;
  std::string phase;
  bool cached = false;  // response replayed from the reasoning cache
  int attempts = 1;
};

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

/// A single raw exchange with a judge model. Implementations: HTTP client
/// (chat-completions wire protocol) and the deterministic scripted backend.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual ChatResponse exchange(const BackendProfile& profile, const ChatRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Throttling
// ---------------------------------------------------------------------------

/// Sliding-window limiter: never more than `limit` acquisitions inside any
/// 60-second window on the injected clock.
class RateLimiter {
 public:
  RateLimiter(int limit_per_minute, std::shared_ptr<Clock> clock);
  void acquire();

 private:
  int limit_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::deque<Clock::TimePoint> issued_;
};

/// Bounds the number of concurrently outstanding requests.
class InFlightGate {
 public:
  explicit InFlightGate(int limit);
  void acquire();
  void release();

 private:
  int limit_;
  int in_flight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

/// Uniform judge-model client: capability checks, in-flight gating, rate
/// limiting, and retry with exponential backoff + full jitter. Shareable
/// across threads.
class BackendClient {
 public:
  BackendClient(BackendProfile profile, std::shared_ptr<Transport> transport,
                std::shared_ptr<Clock> clock = system_clock());

  const BackendProfile& profile() const { return profile_; }

  /// One attempt: validates the request against profile capabilities
  /// (before any call), then waits for gate + rate limiter and exchanges.
  ChatResponse complete(const ChatRequest& request);

  /// complete() with retry on transient transport failures and rate-limit
  /// signals; at most retry_limit+1 attempts. Returns the response together
  /// with the attempt count via `attempts_out` when non-null.
  ChatResponse send_with_retry(const ChatRequest& request, int* attempts_out = nullptr);

 private:
  Clock::Duration backoff_delay(int failure_index, std::optional<double> retry_after_s);

  BackendProfile profile_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;
  RateLimiter rate_limiter_;
  InFlightGate gate_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

/// Validates a response payload: log-probabilities clamped/checked <= 0,
/// candidate lists sorted descending and truncated to the requested top-k.
void normalize_token_probabilities(ChatResponse& response, const ChatRequest& request);

}  // namespace metajudge::backend
