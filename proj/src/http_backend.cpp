#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <mutex>
#include <unordered_map>

#include <json.hpp>

#include "metajudge/http_backend.hpp"

namespace metajudge::backend {

using nlohmann::json;

std::string build_wire_request(const BackendProfile& profile, const ChatRequest& request) {
  json body;
  body["model"] = profile.model_id;
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role == Role::System ? "system" : "user"},
                        {"content", m.text}});
  }
  body["messages"] = messages;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.want_token_probabilities) {
    body["logprobs"] = true;
    body["top_logprobs"] = request.top_k_probabilities;
  }
  return body.dump();
}

ChatResponse parse_wire_response(const std::string& body, const ChatRequest& request) {
  json root = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) throw MalformedResponseError("response body is not valid JSON");
  if (!root.contains("choices") || !root["choices"].is_array() || root["choices"].empty())
    throw MalformedResponseError("response has no choices");
  const json& choice = root["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string())
    throw MalformedResponseError("response choice has no message content");

  ChatResponse response;
  response.text = choice["message"]["content"].get<std::string>();

  if (request.want_token_probabilities) {
    if (!choice.contains("logprobs") || !choice["logprobs"].contains("content"))
      throw MalformedResponseError("token probabilities requested but missing from response");
    std::vector<TokenPosition> positions;
    int index = 0;
    for (const auto& entry : choice["logprobs"]["content"]) {
      TokenPosition pos;
      pos.position = index++;
      std::string emitted;
      double emitted_lp = 0.0;
      bool have_emitted = false;
      if (entry.contains("token") && entry.contains("logprob")) {
        emitted = entry["token"].get<std::string>();
        emitted_lp = entry["logprob"].get<double>();
        have_emitted = true;
      }
      bool emitted_in_top = false;
      if (entry.contains("top_logprobs")) {
        for (const auto& cand : entry["top_logprobs"]) {
          if (!cand.contains("token") || !cand.contains("logprob"))
            throw MalformedResponseError("top_logprobs entry missing token/logprob");
          TokenCandidate c{cand["token"].get<std::string>(), cand["logprob"].get<double>()};
          if (have_emitted && c.token == emitted) emitted_in_top = true;
          pos.candidates.push_back(std::move(c));
        }
      }
      // The sampled token is the anchor the parser scans for; make sure it
      // is present even when the provider omits it from the top-k list.
      if (have_emitted && !emitted_in_top)
        pos.candidates.push_back({emitted, emitted_lp});
      positions.push_back(std::move(pos));
    }
    response.token_probabilities = std::move(positions);
  }

  if (root.contains("usage")) {
    response.usage.prompt_tokens = root["usage"].value("prompt_tokens", 0);
    response.usage.completion_tokens = root["usage"].value("completion_tokens", 0);
  }
  return response;
}

namespace {

struct ParsedEndpoint {
  std::string scheme_host_port;  // e.g. "https://api.openai.com"
  std::string base_path;         // e.g. "/v1"
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("backend endpoint must start with http:// or https://: " + endpoint);
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string base = endpoint.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {endpoint.substr(0, path_start), base};
}

std::optional<double> parse_retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  try {
    return std::stod(res.get_header_value("Retry-After"));
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

struct HttpTransport::Impl {
  std::mutex mu;
  std::unordered_map<std::string, std::unique_ptr<httplib::Client>> clients;

  httplib::Client& client_for(const std::string& scheme_host_port) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = clients.find(scheme_host_port);
    if (it == clients.end()) {
      auto client = std::make_unique<httplib::Client>(scheme_host_port);
      client->set_connection_timeout(30);
      client->set_read_timeout(600);
      it = clients.emplace(scheme_host_port, std::move(client)).first;
    }
    return *it->second;
  }
};

HttpTransport::HttpTransport() : impl_(std::make_unique<Impl>()) {}
HttpTransport::~HttpTransport() = default;

ChatResponse HttpTransport::exchange(const BackendProfile& profile, const ChatRequest& request) {
  ParsedEndpoint endpoint = split_endpoint(profile.endpoint);
  httplib::Headers headers;
  if (!profile.api_key_env.empty()) {
    const char* key = std::getenv(profile.api_key_env.c_str());
    if (!key || !*key)
      throw ConfigError("environment variable " + profile.api_key_env +
                        " is not set (required by backend '" + profile.name + "')");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string body = build_wire_request(profile, request);
  auto result = impl_->client_for(endpoint.scheme_host_port)
                    .Post(endpoint.base_path + "/chat/completions", headers, body,
                          "application/json");
  if (!result)
    throw TransportError("connection to " + profile.endpoint +
                             " failed: " + httplib::to_string(result.error()),
                         /*retryable=*/true);
  if (result->status == 429)
    throw RateLimitedError("backend returned 429", parse_retry_after(*result));
  if (result->status >= 500)
    throw TransportError("backend returned " + std::to_string(result->status),
                         /*retryable=*/true);
  if (result->status != 200)
    throw TransportError("backend returned " + std::to_string(result->status) + ": " +
                             result->body.substr(0, 200),
                         /*retryable=*/false);
  return parse_wire_response(result->body, request);
}

}  // namespace metajudge::backend
