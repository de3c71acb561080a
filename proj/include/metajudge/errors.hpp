#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace metajudge {

/// Coarse failure categories; the CLI maps them to exit codes
/// (config -> 2, data -> 3, transport -> 4, everything else -> 1).
enum class ErrorCategory { Config, Data, Transport, Parse, Store, Internal };

int exit_code_for(ErrorCategory category);
const char* category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const { return category_; }
  const std::string& code() const { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& message, std::string code = "config")
      : Error(ErrorCategory::Config, std::move(code), message) {}
};

/// Raised before any network call when a request asks for something the
/// backend profile cannot deliver (e.g. token probabilities).
struct CapabilityError : ConfigError {
  explicit CapabilityError(const std::string& message)
      : ConfigError(message, "capability") {}
};

struct DataError : Error {
  DataError(std::string code, const std::string& message)
      : Error(ErrorCategory::Data, std::move(code), message) {}
};

struct TransportError : Error {
  TransportError(const std::string& message, bool retryable_, int attempts_ = 1)
      : Error(ErrorCategory::Transport, "transport", message),
        retryable(retryable_),
        attempts(attempts_) {}

  bool retryable;
  int attempts;
};

/// Rate-limit signal from the backend; retried internally by
/// send_with_retry and only surfaced once retries are exhausted.
struct RateLimitedError : TransportError {
  explicit RateLimitedError(const std::string& message,
                            std::optional<double> retry_after_s_ = std::nullopt)
      : TransportError(message, /*retryable=*/true), retry_after_s(retry_after_s_) {}

  std::optional<double> retry_after_s;
};

/// Wire payload arrived but is missing required fields. Not retryable.
struct MalformedResponseError : Error {
  explicit MalformedResponseError(const std::string& message)
      : Error(ErrorCategory::Transport, "malformed_response", message) {}
};

/// Verdict/score extraction failures. Codes: parse_empty, parse_ambiguous,
/// illegal_tie, out_of_range, no_score_token, empty_support.
struct ParseError : Error {
  ParseError(std::string code, const std::string& message)
      : Error(ErrorCategory::Parse, std::move(code), message) {}
};

struct StoreError : Error {
  StoreError(std::string code, const std::string& message)
      : Error(ErrorCategory::Store, std::move(code), message) {}
};

}  // namespace metajudge
