#include "metajudge/backend.hpp"

#include <algorithm>
#include <chrono>

namespace metajudge::backend {

using std::chrono::duration_cast;
using std::chrono::milliseconds;

void BackendProfile::validate() const {
  if (name.empty()) throw ConfigError("backend profile has empty name");
  if (model_id.empty()) throw ConfigError("backend profile '" + name + "' has empty model_id");
  if (max_in_flight < 1)
    throw ConfigError("backend profile '" + name + "': max_in_flight must be >= 1");
  if (requests_per_minute < 1)
    throw ConfigError("backend profile '" + name + "': requests_per_minute must be >= 1");
  if (retry_limit < 0)
    throw ConfigError("backend profile '" + name + "': retry_limit must be >= 0");
}

std::string ChatRequest::rendered_text() const {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "\n\n";
    out += m.text;
  }
  return out;
}

void ChatRequest::validate(const BackendProfile& profile) const {
  bool has_user = false;
  for (const auto& m : messages)
    if (m.role == Role::User) has_user = true;
  if (!has_user) throw ConfigError("chat request needs at least one user message");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (top_k_probabilities < 1 || top_k_probabilities > 20)
    throw ConfigError("top_k_probabilities must be in [1,20]");
  if (want_token_probabilities && !profile.supports_token_probabilities)
    throw CapabilityError("backend '" + profile.name +
                          "' does not support token probabilities; refusing request");
}

RateLimiter::RateLimiter(int limit_per_minute, std::shared_ptr<Clock> clock)
    : limit_(limit_per_minute), clock_(std::move(clock)) {}

void RateLimiter::acquire() {
  constexpr auto kWindow = std::chrono::seconds(60);
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    auto now = clock_->now();
    while (!issued_.empty() && now - issued_.front() >= kWindow) issued_.pop_front();
    if (static_cast<int>(issued_.size()) < limit_) {
      issued_.push_back(now);
      return;
    }
    auto wake_at = issued_.front() + kWindow;
    auto wait = wake_at - now;
    lock.unlock();
    clock_->sleep_for(wait);
    lock.lock();
  }
}

InFlightGate::InFlightGate(int limit) : limit_(limit) {}

void InFlightGate::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
}

void InFlightGate::release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

void normalize_token_probabilities(ChatResponse& response, const ChatRequest& request) {
  if (!response.token_probabilities) return;
  for (auto& position : *response.token_probabilities) {
    for (auto& cand : position.candidates) {
      if (cand.logprob > 1e-9)
        throw MalformedResponseError("positive log-probability in response payload");
      if (cand.logprob > 0.0) cand.logprob = 0.0;
    }
    std::stable_sort(position.candidates.begin(), position.candidates.end(),
                     [](const TokenCandidate& x, const TokenCandidate& y) {
                       return x.logprob > y.logprob;
                     });
    if (static_cast<int>(position.candidates.size()) > request.top_k_probabilities)
      position.candidates.resize(request.top_k_probabilities);
  }
}

BackendClient::BackendClient(BackendProfile profile, std::shared_ptr<Transport> transport,
                             std::shared_ptr<Clock> clock)
    : profile_(std::move(profile)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      rate_limiter_(profile_.requests_per_minute, clock_),
      gate_(profile_.max_in_flight),
      rng_(std::random_device{}()) {
  profile_.validate();
}

ChatResponse BackendClient::complete(const ChatRequest& request) {
  request.validate(profile_);  // capability failures never reach the gate
  gate_.acquire();
  struct Release {
    InFlightGate& g;
    ~Release() { g.release(); }
  } release{gate_};
  rate_limiter_.acquire();
  auto start = clock_->now();
  ChatResponse response = transport_->exchange(profile_, request);
  response.latency_ms =
      static_cast<double>(duration_cast<milliseconds>(clock_->now() - start).count());
  normalize_token_probabilities(response, request);
  return response;
}

Clock::Duration BackendClient::backoff_delay(int failure_index,
                                             std::optional<double> retry_after_s) {
  // base 1s, factor 2, full jitter, cap 60s; a server-provided retry-after
  // is a lower bound on the delay.
  double cap_s = 60.0;
  double ceiling = std::min(cap_s, std::ldexp(1.0, failure_index));  // 1 * 2^k
  double jittered;
  {
    std::lock_guard<std::mutex> lock(rng_mu_);
    jittered = std::uniform_real_distribution<double>(0.0, ceiling)(rng_);
  }
  double delay_s = std::max(jittered, retry_after_s.value_or(0.0));
  return duration_cast<Clock::Duration>(std::chrono::duration<double>(delay_s));
}

ChatResponse BackendClient::send_with_retry(const ChatRequest& request, int* attempts_out) {
  int attempts = 0;
  for (;;) {
    ++attempts;
    try {
      ChatResponse response = complete(request);
      if (attempts_out) *attempts_out = attempts;
      return response;
    } catch (const TransportError& e) {
      if (!e.retryable || attempts > profile_.retry_limit) {
        throw TransportError(std::string(e.what()) + " (attempts=" + std::to_string(attempts) +
                                 ")",
                             /*retryable=*/false, attempts);
      }
      std::optional<double> retry_after;
      if (auto* rl = dynamic_cast<const RateLimitedError*>(&e)) retry_after = rl->retry_after_s;
      clock_->sleep_for(backoff_delay(attempts - 1, retry_after));
    }
  }
}

}  // namespace metajudge::backend
