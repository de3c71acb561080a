#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "metajudge/http_backend.hpp"

namespace metajudge::backend {
namespace {

using nlohmann::json;

constexpr const char* kKeyEnv = "METAJUDGE_TEST_API_KEY";

json ok_payload(const std::string& text) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"},
                                                     {"content", text}}}}})},
              {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ::setenv(kKeyEnv, "sekrit-token", 1);
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      {
        std::lock_guard<std::mutex> lock(mu_);
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
        ++requests_;
      }
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
    ::unsetenv(kKeyEnv);
  }

  BackendProfile profile() const {
    BackendProfile p;
    p.name = "local-http";
    p.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    p.model_id = "judge-model-7";
    p.api_key_env = kKeyEnv;
    p.supports_token_probabilities = true;
    p.requests_per_minute = 6000;
    return p;
  }

  static ChatRequest simple_request() {
    ChatRequest request;
    request.messages = {ChatMessage{Role::User, "judge this text"}};
    return request;
  }

  void respond_with(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
    handler_ = std::move(fn);
  }

  std::string last_body() {
    std::lock_guard<std::mutex> lock(mu_);
    return last_body_;
  }
  std::string last_auth() {
    std::lock_guard<std::mutex> lock(mu_);
    return last_auth_;
  }
  int requests_seen() {
    std::lock_guard<std::mutex> lock(mu_);
    return requests_;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  HttpTransport transport_;

 private:
  std::mutex mu_;
  std::string last_body_;
  std::string last_auth_;
  int requests_ = 0;
  std::function<void(const httplib::Request&, httplib::Response&)> handler_ =
      [](const httplib::Request&, httplib::Response& res) {
        res.set_content(ok_payload("fine").dump(), "application/json");
      };
};

TEST_F(HttpTest, SendsTheChatCompletionsWireShape) {
  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.set_content(ok_payload("Decision: Output (a)").dump(), "application/json");
  });

  ChatRequest request;
  request.messages = {ChatMessage{Role::System, "be fair"},
                      ChatMessage{Role::User, "compare the outputs"}};
  request.temperature = 0.25;
  request.max_tokens = 64;

  ChatResponse response = transport_.exchange(profile(), request);
  EXPECT_EQ(response.text, "Decision: Output (a)");
  EXPECT_EQ(response.usage.prompt_tokens, 12);
  EXPECT_EQ(response.usage.completion_tokens, 3);

  EXPECT_EQ(last_auth(), "Bearer sekrit-token");
  json body = json::parse(last_body());
  EXPECT_EQ(body.at("model"), "judge-model-7");
  EXPECT_EQ(body.at("temperature").get<double>(), 0.25);
  EXPECT_EQ(body.at("max_tokens").get<int>(), 64);
  ASSERT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(body["messages"][0].at("role"), "system");
  EXPECT_EQ(body["messages"][0].at("content"), "be fair");
  EXPECT_EQ(body["messages"][1].at("role"), "user");
  EXPECT_FALSE(body.contains("logprobs"));  // not requested
}

TEST_F(HttpTest, RequestsLogProbsOnlyWhenWanted) {
  ChatRequest request = simple_request();
  request.want_token_probabilities = true;
  request.top_k_probabilities = 5;

  respond_with([](const httplib::Request&, httplib::Response& res) {
    json payload = ok_payload("4");
    payload["choices"][0]["logprobs"] = {
        {"content",
         json::array({{{"token", "4"},
                       {"logprob", -0.3},
                       {"top_logprobs",
                        json::array({{{"token", "4"}, {"logprob", -0.3}},
                                     {{"token", "5"}, {"logprob", -1.8}}})}}})}};
    res.set_content(payload.dump(), "application/json");
  });

  ChatResponse response = transport_.exchange(profile(), request);
  json body = json::parse(last_body());
  EXPECT_EQ(body.at("logprobs"), true);
  EXPECT_EQ(body.at("top_logprobs").get<int>(), 5);

  ASSERT_TRUE(response.token_probabilities.has_value());
  ASSERT_EQ(response.token_probabilities->size(), 1u);
  const auto& candidates = (*response.token_probabilities)[0].candidates;
  ASSERT_EQ(candidates.size(), 2u);
  EXPECT_EQ(candidates[0].token, "4");
  EXPECT_EQ(candidates[1].token, "5");
}

TEST_F(HttpTest, InjectsTheEmittedTokenWhenTopKOmitsIt) {
  respond_with([](const httplib::Request&, httplib::Response& res) {
    json payload = ok_payload("3");
    payload["choices"][0]["logprobs"] = {
        {"content",
         json::array({{{"token", "3"},
                       {"logprob", -0.9},
                       {"top_logprobs",
                        json::array({{{"token", "4"}, {"logprob", -0.5}}})}}})}};
    res.set_content(payload.dump(), "application/json");
  });

  ChatRequest request = simple_request();
  request.want_token_probabilities = true;
  ChatResponse response = transport_.exchange(profile(), request);

  ASSERT_TRUE(response.token_probabilities.has_value());
  const auto& candidates = (*response.token_probabilities)[0].candidates;
  ASSERT_EQ(candidates.size(), 2u);
  bool found_emitted = false;
  for (const auto& c : candidates)
    if (c.token == "3" && c.logprob == -0.9) found_emitted = true;
  EXPECT_TRUE(found_emitted);
}

TEST_F(HttpTest, MissingApiKeyEnvFailsBeforeAnyRequest) {
  ::unsetenv(kKeyEnv);
  try {
    transport_.exchange(profile(), simple_request());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(kKeyEnv), std::string::npos);
  }
  EXPECT_EQ(requests_seen(), 0);
}

TEST_F(HttpTest, RateLimitResponseCarriesRetryAfter) {
  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
    res.set_header("Retry-After", "2");
    res.set_content("slow down", "text/plain");
  });
  try {
    transport_.exchange(profile(), simple_request());
    FAIL();
  } catch (const RateLimitedError& e) {
    EXPECT_TRUE(e.retryable);
    ASSERT_TRUE(e.retry_after_s.has_value());
    EXPECT_DOUBLE_EQ(*e.retry_after_s, 2.0);
  }
}

TEST_F(HttpTest, ServerErrorsAreRetryableAndRetriedByTheClient) {
  std::atomic<int> hits{0};
  respond_with([&hits](const httplib::Request&, httplib::Response& res) {
    if (hits.fetch_add(1) == 0) {
      res.status = 503;
      res.set_content("overloaded", "text/plain");
    } else {
      res.set_content(ok_payload("recovered").dump(), "application/json");
    }
  });

  auto clock = std::make_shared<ManualClock>();
  BackendClient client(profile(), std::shared_ptr<Transport>(&transport_, [](Transport*) {}),
                       clock);
  int attempts = 0;
  ChatResponse response = client.send_with_retry(simple_request(), &attempts);
  EXPECT_EQ(response.text, "recovered");
  EXPECT_EQ(attempts, 2);
  EXPECT_EQ(requests_seen(), 2);
}

TEST_F(HttpTest, ClientErrorsAreNotRetryable) {
  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  try {
    transport_.exchange(profile(), simple_request());
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_FALSE(e.retryable);
  }
}

TEST_F(HttpTest, MalformedPayloadsAreRejected) {
  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.set_content("this is not json", "application/json");
  });
  EXPECT_THROW(transport_.exchange(profile(), simple_request()), MalformedResponseError);

  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"choices", json::array()}}.dump(), "application/json");
  });
  EXPECT_THROW(transport_.exchange(profile(), simple_request()), MalformedResponseError);

  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"choices", json::array({{{"message", {{"role", "assistant"}}}}})}}
                        .dump(),
                    "application/json");
  });
  EXPECT_THROW(transport_.exchange(profile(), simple_request()), MalformedResponseError);
}

TEST_F(HttpTest, MissingLogProbsWhenRequestedIsMalformed) {
  respond_with([](const httplib::Request&, httplib::Response& res) {
    res.set_content(ok_payload("4").dump(), "application/json");  // no logprobs block
  });
  ChatRequest request = simple_request();
  request.want_token_probabilities = true;
  EXPECT_THROW(transport_.exchange(profile(), request), MalformedResponseError);
}

TEST(HttpEndpoint, RejectsEndpointsWithoutAScheme) {
  HttpTransport transport;
  BackendProfile p;
  p.name = "broken";
  p.model_id = "m";
  p.endpoint = "api.example.com/v1";
  ChatRequest request;
  request.messages = {ChatMessage{Role::User, "hi"}};
  EXPECT_THROW(transport.exchange(p, request), ConfigError);
}

}  // namespace
}  // namespace metajudge::backend
