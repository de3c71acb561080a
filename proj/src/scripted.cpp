#include "metajudge/scripted.hpp"

#include <chrono>
#include <regex>
#include <thread>

#include "metajudge/jsonio.hpp"

namespace metajudge::backend {

bool ScriptedRule::matches(const std::string& prompt) const {
  if (match && prompt.find(*match) == std::string::npos) return false;
  if (match_all) {
    for (const auto& needle : *match_all)
      if (prompt.find(needle) == std::string::npos) return false;
  }
  if (match_regex) {
    std::regex re(*match_regex, std::regex::ECMAScript);
    if (!std::regex_search(prompt, re)) return false;
  }
  return true;
}

ScriptedTransport::ScriptedTransport(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {}

void ScriptedTransport::add_rule(ScriptedRule rule) {
  std::lock_guard<std::mutex> lock(mu_);
  rules_.push_back(std::move(rule));
  remaining_failures_.push_back(rules_.back().fail_times);
}

static std::vector<TokenPosition> parse_token_table(const nlohmann::json& table) {
  std::vector<TokenPosition> positions;
  int index = 0;
  for (const auto& entry : table) {
    TokenPosition pos;
    pos.position = index++;
    for (const auto& cand : entry) {
      if (!cand.is_array() || cand.size() != 2)
        throw DataError("malformed_record", "token_logprobs candidate must be [token, logprob]");
      double lp = cand[1].get<double>();
      if (lp > 0.0)
        throw DataError("malformed_record", "token_logprobs must carry log-probabilities <= 0");
      pos.candidates.push_back({cand[0].get<std::string>(), lp});
    }
    positions.push_back(std::move(pos));
  }
  return positions;
}

std::shared_ptr<ScriptedTransport> ScriptedTransport::from_file(const std::filesystem::path& path,
                                                                std::shared_ptr<Clock> clock) {
  auto transport = std::make_shared<ScriptedTransport>(std::move(clock));
  for (const auto& record : jsonio::read_records(path)) {
    ScriptedRule rule;
    if (record.contains("match")) rule.match = record.at("match").get<std::string>();
    if (record.contains("match_all"))
      rule.match_all = record.at("match_all").get<std::vector<std::string>>();
    if (record.contains("match_regex"))
      rule.match_regex = record.at("match_regex").get<std::string>();
    rule.response = record.value("response", std::string());
    if (record.contains("token_logprobs"))
      rule.token_logprobs = parse_token_table(record.at("token_logprobs"));
    rule.fail_times = record.value("fail_times", 0);
    rule.fail_kind = record.value("fail_kind", std::string("transport"));
    if (record.contains("retry_after_s")) rule.retry_after_s = record.at("retry_after_s").get<double>();
    rule.delay_ms = record.value("delay_ms", 0);
    transport->add_rule(std::move(rule));
  }
  return transport;
}

ChatResponse ScriptedTransport::exchange(const BackendProfile& profile,
                                         const ChatRequest& request) {
  (void)profile;
  std::string prompt = request.rendered_text();
  int rule_index = -1;
  bool inject_failure = false;
  ScriptedRule rule_copy;
  int delay_ms = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (size_t i = 0; i < rules_.size(); ++i) {
      if (rules_[i].matches(prompt)) {
        rule_index = static_cast<int>(i);
        break;
      }
    }
    ++in_flight_;
    max_concurrency_ = std::max(max_concurrency_, in_flight_);
    ScriptedCall call;
    call.index = static_cast<int>(log_.size());
    call.prompt = prompt;
    call.tag = request.tag;
    call.rule_index = rule_index;
    call.concurrent_at_entry = in_flight_;
    call.at_ms = std::chrono::duration<double, std::milli>(
                     clock_->now().time_since_epoch())
                     .count();
    log_.push_back(std::move(call));
    if (rule_index >= 0) {
      rule_copy = rules_[rule_index];
      delay_ms = rule_copy.delay_ms;
      if (remaining_failures_[rule_index] > 0) {
        --remaining_failures_[rule_index];
        inject_failure = true;
      }
    }
  }

  struct Depart {
    ScriptedTransport* t;
    ~Depart() {
      std::lock_guard<std::mutex> lock(t->mu_);
      --t->in_flight_;
    }
  } depart{this};

  if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));

  if (rule_index < 0)
    throw TransportError("no scripted rule matched prompt (first 120 chars): " +
                             prompt.substr(0, 120),
                         /*retryable=*/false);

  if (inject_failure) {
    if (rule_copy.fail_kind == "rate_limited")
      throw RateLimitedError("scripted rate limit", rule_copy.retry_after_s);
    throw TransportError("scripted transport failure", /*retryable=*/true);
  }

  ChatResponse response;
  response.text = rule_copy.response;
  if (request.want_token_probabilities && rule_copy.token_logprobs)
    response.token_probabilities = rule_copy.token_logprobs;
  response.usage.prompt_tokens = static_cast<int>(prompt.size() / 4);
  response.usage.completion_tokens = static_cast<int>(response.text.size() / 4);
  return response;
}

std::vector<ScriptedCall> ScriptedTransport::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

int ScriptedTransport::call_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return static_cast<int>(log_.size());
}

int ScriptedTransport::call_count_with_tag(const std::string& tag) const {
  std::lock_guard<std::mutex> lock(mu_);
  int n = 0;
  for (const auto& call : log_)
    if (call.tag == tag) ++n;
  return n;
}

int ScriptedTransport::max_concurrency() const {
  std::lock_guard<std::mutex> lock(mu_);
  return max_concurrency_;
}

void ScriptedTransport::reset_log() {
  std::lock_guard<std::mutex> lock(mu_);
  log_.clear();
  in_flight_ = 0;
  max_concurrency_ = 0;
}

}  // namespace metajudge::backend
