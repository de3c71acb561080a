#pragma once

#include <memory>
#include <string>

#include "metajudge/backend.hpp"

namespace metajudge::backend {

/// Chat-completions wire client. POSTs {endpoint}/chat/completions and reads
/// choices[0].message.content plus, when token probabilities are requested,
/// choices[0].logprobs.content[*].top_logprobs[*].{token, logprob}.
class HttpTransport : public Transport {
 public:
  HttpTransport();
  ~HttpTransport() override;

  ChatResponse exchange(const BackendProfile& profile, const ChatRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Builds the JSON request body for the wire protocol (exposed for tests).
std::string build_wire_request(const BackendProfile& profile, const ChatRequest& request);

/// Parses a wire response body into a ChatResponse; throws
/// MalformedResponseError when required fields are missing.
ChatResponse parse_wire_response(const std::string& body, const ChatRequest& request);

}  // namespace metajudge::backend
