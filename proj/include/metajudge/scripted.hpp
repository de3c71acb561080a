#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "metajudge/backend.hpp"

namespace metajudge::backend {

/// One scripted rule. Predicates apply to the rendered prompt text; first
/// matching rule in table order wins. `fail_times` makes the first N hits
/// raise a transport or rate-limit error before the response is served.
struct ScriptedRule {
  std::optional<std::string> match;                // substring
  std::optional<std::vector<std::string>> match_all;  // all substrings present
  std::optional<std::string> match_regex;          // ECMAScript regex, searched
  std::string response;
  std::optional<std::vector<TokenPosition>> token_logprobs;
  int fail_times = 0;
  std::string fail_kind = "transport";  // or "rate_limited"
  std::optional<double> retry_after_s;
  int delay_ms = 0;  // real sleep inside the exchange, for concurrency tests

  bool matches(const std::string& prompt) const;
};

struct ScriptedCall {
  int index = 0;
  std::string prompt;
  std::string tag;
  int rule_index = -1;
  int concurrent_at_entry = 0;  // including this call
  double at_ms = 0.0;           // clock time at entry, ms since clock epoch
};

/// Deterministic judge stand-in: same rule table + same request => same
/// response. Records every call (order, prompt, concurrency) for assertions.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::shared_ptr<Clock> clock = system_clock());

  static std::shared_ptr<ScriptedTransport> from_file(const std::filesystem::path& path,
                                                      std::shared_ptr<Clock> clock = system_clock());

  void add_rule(ScriptedRule rule);

  ChatResponse exchange(const BackendProfile& profile, const ChatRequest& request) override;

  std::vector<ScriptedCall> calls() const;
  int call_count() const;
  int call_count_with_tag(const std::string& tag) const;
  int max_concurrency() const;
  void reset_log();

 private:
  std::shared_ptr<Clock> clock_;
  mutable std::mutex mu_;
  std::vector<ScriptedRule> rules_;
  std::vector<int> remaining_failures_;
  std::vector<ScriptedCall> log_;
  int in_flight_ = 0;
  int max_concurrency_ = 0;
};

}  // namespace metajudge::backend
