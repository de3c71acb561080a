#include "metajudge/strategies.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "metajudge/errors.hpp"

namespace metajudge::strategies {

using backend::ChatExchange;
using backend::ChatMessage;
using backend::ChatRequest;
using backend::Role;
using prompts::Phase;
using prompts::PromptFamily;
using prompts::PromptTemplate;
using prompts::RenderContext;

namespace {

// Two weighted sums computed from identical inputs compare exactly equal;
// the epsilon only guards against reordered arithmetic.
constexpr double kScoreEps = 1e-12;
constexpr const char* kDisagreementNote = "order_swap_disagreement";

// Rules slot content for two-option datasets that do not ask for the full
// evaluation-rules block.
const std::string kNeutralRules =
    "Judge solely by how well each output satisfies the instruction.";

}  // namespace

void RunConfig::validate() const {
  if (temperature < 0.0 || temperature > 2.0)
    throw ConfigError("temperature must be within [0, 2]", "bad_run_config");
  if (inconclusive_credit < 0.0 || inconclusive_credit > 1.0)
    throw ConfigError("inconclusive-credit must be within [0, 1]", "bad_run_config");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive", "bad_run_config");
  if (workers < 0) throw ConfigError("workers must be >= 0", "bad_run_config");
}

double weighted_sum(const parse::ScoreDistribution& dist) {
  double sum = 0.0;
  for (const auto& [score, p] : dist.mass()) sum += score * p;
  return sum;
}

// ---------------------------------------------------------------------------
// One judging pass over one sample
// ---------------------------------------------------------------------------

namespace {

class Pass {
 public:
  Pass(const prompts::PromptRegistry& registry, backend::BackendClient& client,
       cache::ReasoningStore* store, const RunConfig& config, const EvalSample& sample,
       std::vector<ChatExchange>& transcripts)
      : registry_(registry),
        client_(client),
        store_(store),
        config_(config),
        sample_(sample),
        transcripts_(transcripts),
        family_(sample.dataset.tie_allowed ? PromptFamily::ThreeWay : PromptFamily::TwoWay),
        tie_allowed_(sample.dataset.tie_allowed) {
    if (!sample.dataset.rules_injection) rules_override_ = kNeutralRules;
  }

  Verdict run() {
    switch (config_.strategy) {
      case StrategyKind::Pointwise:
        return run_pointwise();
      case StrategyKind::Pairwise:
      case StrategyKind::PairwiseCoT:
        return run_pairwise(std::nullopt);
      case StrategyKind::PRePair:
        return run_prepair(std::nullopt);
      case StrategyKind::PRePairStar:
        return run_star();
      case StrategyKind::PairwiseSGM:
        return run_pairwise(generate_metrics());
      case StrategyKind::PRePairSGM:
        return run_prepair(generate_metrics());
    }
    throw ConfigError("unknown strategy", "bad_enum");
  }

 private:
  const PromptTemplate& tpl(Phase phase) const {
    return registry_.get(family_, config_.strategy, phase);
  }

  RenderContext base_context() const {
    RenderContext ctx;
    ctx.instruction = sample_.instruction;
    ctx.rules = rules_override_;
    return ctx;
  }

  ChatRequest make_request(const PromptTemplate& t, const RenderContext& ctx, Phase phase,
                           bool want_probs) const {
    ChatRequest request;
    request.messages = {ChatMessage{Role::User, prompts::render(t, ctx)}};
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_tokens;
    request.want_token_probabilities = want_probs;
    request.tag = prompts::to_string(phase);
    return request;
  }

  // Issues one model call and records the exchange.
  const ChatExchange& call(Phase phase, const RenderContext& ctx, bool want_probs) {
    ChatRequest request = make_request(tpl(phase), ctx, phase, want_probs);
    int attempts = 1;
    backend::ChatResponse response = client_.send_with_retry(request, &attempts);
    transcripts_.push_back(
        ChatExchange{std::move(request), std::move(response), prompts::to_string(phase),
                     /*cached=*/false, attempts});
    return transcripts_.back();
  }

  // A reasoning call routed through the store when one is attached; replays
  // are recorded as cached exchanges so the audit trail stays complete.
  std::string reasoned(Phase phase, const RenderContext& ctx,
                       const std::string& cache_output_field) {
    const PromptTemplate& t = tpl(phase);
    if (!store_) return call(phase, ctx, /*want_probs=*/false).response.text;

    ChatRequest request = make_request(t, ctx, phase, /*want_probs=*/false);
    cache::ReasoningKey key{client_.profile().model_id, t.id,      t.version,
                            config_.temperature,        sample_.instruction,
                            cache_output_field};
    bool issued = false;
    ChatExchange issued_exchange;
    std::string text = store_->get_or_compute(key, [&] {
      int attempts = 1;
      backend::ChatResponse response = client_.send_with_retry(request, &attempts);
      issued = true;
      issued_exchange = ChatExchange{request, std::move(response), prompts::to_string(phase),
                                     /*cached=*/false, attempts};
      return issued_exchange.response.text;
    });

    if (issued) {
      transcripts_.push_back(std::move(issued_exchange));
    } else {
      ChatExchange replay;
      replay.request = std::move(request);
      replay.response.text = text;
      replay.phase = prompts::to_string(phase);
      replay.cached = true;
      transcripts_.push_back(std::move(replay));
    }
    return text;
  }

  std::string generate_metrics() {
    RenderContext ctx;
    ctx.instruction = sample_.instruction;
    return reasoned(Phase::MetricGen, ctx, /*cache_output_field=*/"");
  }

  Verdict run_pointwise() {
    const bool weighted = family_ == PromptFamily::TwoWay;
    Verdict verdict;
    std::optional<double> scores[2];
    const std::string outputs[2] = {sample_.output_a, sample_.output_b};
    const char* sides[2] = {"output_a", "output_b"};

    for (int i = 0; i < 2; ++i) {
      RenderContext ctx = base_context();
      ctx.output = outputs[i];
      try {
        const ChatExchange& exchange = call(Phase::SingleJudge, ctx, weighted);
        if (weighted) {
          if (!exchange.response.token_probabilities)
            throw ParseError("no_score_token", "backend returned no token probabilities");
          scores[i] = weighted_sum(
              parse::extract_score_distribution(*exchange.response.token_probabilities));
        } else {
          scores[i] = static_cast<double>(parse::parse_likert_score(exchange.response.text));
        }
      } catch (const ParseError& e) {
        if (verdict.note.empty()) verdict.note = std::string(sides[i]) + ":" + e.code();
      }
    }

    verdict.score_a = scores[0];
    verdict.score_b = scores[1];
    if (!scores[0] || !scores[1]) {
      verdict.choice = Choice::Inconclusive;
      return verdict;
    }
    double diff = *scores[0] - *scores[1];
    if (std::abs(diff) <= kScoreEps) {
      if (tie_allowed_) {
        verdict.choice = Choice::Tie;
      } else {
        verdict.choice = Choice::Inconclusive;
        verdict.note = "equal_scores";
      }
    } else {
      verdict.choice = diff > 0 ? Choice::A : Choice::B;
    }
    return verdict;
  }

  Verdict judge_pair(Phase phase, RenderContext ctx) {
    ctx.output_a = sample_.output_a;
    ctx.output_b = sample_.output_b;
    Verdict verdict;
    const ChatExchange& exchange = call(phase, ctx, /*want_probs=*/false);
    try {
      verdict.choice = parse::parse_pairwise_verdict(exchange.response.text, tie_allowed_);
    } catch (const ParseError& e) {
      verdict.choice = Choice::Inconclusive;
      verdict.note = e.code();
    }
    return verdict;
  }

  Verdict run_pairwise(std::optional<std::string> metrics) {
    RenderContext ctx = base_context();
    ctx.metrics = std::move(metrics);
    return judge_pair(Phase::PairJudge, std::move(ctx));
  }

  Verdict run_prepair(std::optional<std::string> metrics) {
    RenderContext reason_a = base_context();
    reason_a.metrics = metrics;
    reason_a.output = sample_.output_a;
    std::string explanation_a = reasoned(Phase::PointReason, reason_a, sample_.output_a);

    RenderContext reason_b = base_context();
    reason_b.metrics = metrics;
    reason_b.output = sample_.output_b;
    std::string explanation_b = reasoned(Phase::PointReason, reason_b, sample_.output_b);

    RenderContext final_ctx = base_context();
    final_ctx.metrics = std::move(metrics);
    final_ctx.explanation_a = std::move(explanation_a);
    final_ctx.explanation_b = std::move(explanation_b);
    return judge_pair(Phase::FinalJudge, std::move(final_ctx));
  }

  Verdict run_star() {
    // Each output is assessed as "(a)" with its counterpart visible as "(b)".
    // The text depends on the whole pair, so these calls are never cached.
    RenderContext reason_a = base_context();
    reason_a.output_a = sample_.output_a;
    reason_a.output_b = sample_.output_b;
    std::string explanation_a =
        call(Phase::PairReason, reason_a, /*want_probs=*/false).response.text;

    RenderContext reason_b = base_context();
    reason_b.output_a = sample_.output_b;
    reason_b.output_b = sample_.output_a;
    std::string explanation_b =
        call(Phase::PairReason, reason_b, /*want_probs=*/false).response.text;

    RenderContext final_ctx = base_context();
    final_ctx.explanation_a = std::move(explanation_a);
    final_ctx.explanation_b = std::move(explanation_b);
    return judge_pair(Phase::FinalJudge, std::move(final_ctx));
  }

  const prompts::PromptRegistry& registry_;
  backend::BackendClient& client_;
  cache::ReasoningStore* store_;
  const RunConfig& config_;
  const EvalSample& sample_;
  std::vector<ChatExchange>& transcripts_;
  PromptFamily family_;
  bool tie_allowed_;
  std::optional<std::string> rules_override_;
};

}  // namespace

// ---------------------------------------------------------------------------
// StrategyRunner
// ---------------------------------------------------------------------------

StrategyRunner::StrategyRunner(const prompts::PromptRegistry& registry,
                               std::shared_ptr<backend::BackendClient> client,
                               std::shared_ptr<cache::ReasoningStore> store, RunConfig config)
    : registry_(registry), client_(std::move(client)), store_(std::move(store)),
      config_(config) {
  config_.validate();
  if (!client_) throw ConfigError("strategy runner needs a backend client", "bad_run_config");
}

int StrategyRunner::default_workers() const { return client_->profile().max_in_flight; }

prompts::PromptFamily StrategyRunner::family_for(const DatasetKind& kind) const {
  return kind.tie_allowed ? PromptFamily::ThreeWay : PromptFamily::TwoWay;
}

void StrategyRunner::preflight(const DatasetKind& kind) const {
  PromptFamily family = family_for(kind);
  for (Phase phase : prompts::phase_sequence(config_.strategy))
    registry_.get(family, config_.strategy, phase);

  if (config_.strategy == StrategyKind::Pointwise && family == PromptFamily::TwoWay) {
    // Weighted-sum scoring needs per-token probabilities; reject before any
    // network traffic if the backend cannot produce them.
    ChatRequest probe;
    probe.messages = {ChatMessage{Role::User, "capability probe"}};
    probe.want_token_probabilities = true;
    probe.validate(client_->profile());
  }
}

Verdict StrategyRunner::judge_once(const EvalSample& sample,
                                   std::vector<ChatExchange>& transcripts) {
  std::size_t base = transcripts.size();
  Pass pass(registry_, *client_, store_.get(), config_, sample, transcripts);
  Verdict verdict = pass.run();
  for (std::size_t i = base; i < transcripts.size(); ++i)
    verdict.transcripts.push_back(static_cast<int>(i));
  return verdict;
}

std::string template_stamp(const prompts::PromptRegistry& registry,
                           prompts::PromptFamily family, StrategyKind strategy) {
  std::string stamp;
  for (Phase phase : prompts::phase_sequence(strategy)) {
    const prompts::PromptTemplate& tpl = registry.get(family, strategy, phase);
    if (!stamp.empty()) stamp += ";";
    stamp += tpl.id + "@" + tpl.version;
  }
  return stamp;
}

JudgedSample StrategyRunner::judge(const EvalSample& sample) {
  sample.validate();

  JudgedSample out;
  out.sample_id = sample.id;
  out.subset = sample.subset_key();
  out.label = sample.label;
  out.strategy = to_string(config_.strategy);
  out.templates = template_stamp(registry_, family_for(sample.dataset), config_.strategy);

  Verdict first = judge_once(sample, out.transcripts);

  if (!config_.order_swap) {
    out.verdict = first;
  } else {
    EvalSample swapped = sample;
    std::swap(swapped.output_a, swapped.output_b);
    swapped.label = flip(swapped.label);
    Verdict second = judge_once(swapped, out.transcripts);
    Choice mapped = flip(second.choice);

    if (first.choice == mapped) {
      out.verdict = first;
    } else {
      out.verdict.choice = Choice::Inconclusive;
      out.verdict.note = kDisagreementNote;
      out.verdict.score_a = first.score_a;
      out.verdict.score_b = first.score_b;
    }
    out.verdict.transcripts.clear();
    for (std::size_t i = 0; i < out.transcripts.size(); ++i)
      out.verdict.transcripts.push_back(static_cast<int>(i));
  }

  out.credit = agrees(out.verdict, sample.label, config_.inconclusive_credit);
  return out;
}

// ---------------------------------------------------------------------------
// The sample loop
// ---------------------------------------------------------------------------

RunResult run_evaluation(const std::vector<EvalSample>& samples, StrategyRunner& runner,
                         const ProgressFn& progress) {
  RunResult result;
  result.judged.resize(samples.size());
  if (samples.empty()) return result;

  int workers = runner.config().workers;
  if (workers <= 0) workers = runner.default_workers();
  workers = static_cast<int>(std::min<std::size_t>(workers, samples.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr first_error;

  auto work = [&] {
    while (!stop.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) break;
      try {
        result.judged[i] = runner.judge(samples[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
        break;
      }
      std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(mu);
        progress(finished, samples.size());
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  for (auto& thread : pool) thread.join();

  if (first_error) std::rethrow_exception(first_error);
  return result;
}

// ---------------------------------------------------------------------------
// judgments.jsonl round trip
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json exchange_to_json(const ChatExchange& exchange) {
  json messages = json::array();
  for (const auto& message : exchange.request.messages)
    messages.push_back({{"role", message.role == Role::System ? "system" : "user"},
                        {"text", message.text}});

  json doc{{"phase", exchange.phase},
           {"cached", exchange.cached},
           {"attempts", exchange.attempts},
           {"request",
            {{"messages", std::move(messages)},
             {"temperature", exchange.request.temperature},
             {"max_tokens", exchange.request.max_tokens},
             {"want_token_probabilities", exchange.request.want_token_probabilities},
             {"top_k_probabilities", exchange.request.top_k_probabilities},
             {"tag", exchange.request.tag}}},
           {"response",
            {{"text", exchange.response.text},
             {"usage",
              {{"prompt_tokens", exchange.response.usage.prompt_tokens},
               {"completion_tokens", exchange.response.usage.completion_tokens}}}}}};

  if (exchange.response.token_probabilities) {
    json positions = json::array();
    for (const auto& position : *exchange.response.token_probabilities) {
      json candidates = json::array();
      for (const auto& candidate : position.candidates)
        candidates.push_back({candidate.token, candidate.logprob});
      positions.push_back({{"position", position.position},
                           {"candidates", std::move(candidates)}});
    }
    doc["response"]["token_probabilities"] = std::move(positions);
  }
  return doc;
}

ChatExchange exchange_from_json(const json& doc) {
  ChatExchange exchange;
  exchange.phase = doc.at("phase").get<std::string>();
  exchange.cached = doc.at("cached").get<bool>();
  exchange.attempts = doc.at("attempts").get<int>();

  const json& request = doc.at("request");
  for (const json& message : request.at("messages"))
    exchange.request.messages.push_back(
        ChatMessage{message.at("role").get<std::string>() == "system" ? Role::System : Role::User,
                    message.at("text").get<std::string>()});
  exchange.request.temperature = request.at("temperature").get<double>();
  exchange.request.max_tokens = request.at("max_tokens").get<int>();
  exchange.request.want_token_probabilities =
      request.at("want_token_probabilities").get<bool>();
  exchange.request.top_k_probabilities = request.at("top_k_probabilities").get<int>();
  exchange.request.tag = request.at("tag").get<std::string>();

  const json& response = doc.at("response");
  exchange.response.text = response.at("text").get<std::string>();
  exchange.response.usage.prompt_tokens = response.at("usage").at("prompt_tokens").get<int>();
  exchange.response.usage.completion_tokens =
      response.at("usage").at("completion_tokens").get<int>();
  if (response.contains("token_probabilities")) {
    std::vector<backend::TokenPosition> positions;
    for (const json& p : response.at("token_probabilities")) {
      backend::TokenPosition position;
      position.position = p.at("position").get<int>();
      for (const json& candidate : p.at("candidates"))
        position.candidates.push_back(backend::TokenCandidate{
            candidate.at(0).get<std::string>(), candidate.at(1).get<double>()});
      positions.push_back(std::move(position));
    }
    exchange.response.token_probabilities = std::move(positions);
  }
  return exchange;
}

}  // namespace

nlohmann::json judged_to_json(const JudgedSample& judged) {
  json verdict{{"choice", to_string(judged.verdict.choice)},
               {"note", judged.verdict.note},
               {"transcripts", judged.verdict.transcripts}};
  if (judged.verdict.score_a) verdict["score_a"] = *judged.verdict.score_a;
  if (judged.verdict.score_b) verdict["score_b"] = *judged.verdict.score_b;

  json transcripts = json::array();
  for (const auto& exchange : judged.transcripts)
    transcripts.push_back(exchange_to_json(exchange));

  return json{{"sample_id", judged.sample_id},
              {"subset", judged.subset},
              {"label", to_string(judged.label)},
              {"verdict", std::move(verdict)},
              {"credit", judged.credit},
              {"strategy", judged.strategy},
              {"templates", judged.templates},
              {"transcripts", std::move(transcripts)}};
}

JudgedSample judged_from_json(const nlohmann::json& doc) {
  JudgedSample judged;
  try {
    judged.sample_id = doc.at("sample_id").get<std::string>();
    judged.subset = doc.at("subset").get<std::string>();
    auto label = label_from_string(doc.at("label").get<std::string>());
    if (!label) throw DataError("malformed_record", "bad label in judged sample");
    judged.label = *label;

    const json& verdict = doc.at("verdict");
    auto choice = choice_from_string(verdict.at("choice").get<std::string>());
    if (!choice) throw DataError("malformed_record", "bad choice in judged sample");
    judged.verdict.choice = *choice;
    judged.verdict.note = verdict.at("note").get<std::string>();
    judged.verdict.transcripts = verdict.at("transcripts").get<std::vector<int>>();
    if (verdict.contains("score_a")) judged.verdict.score_a = verdict.at("score_a").get<double>();
    if (verdict.contains("score_b")) judged.verdict.score_b = verdict.at("score_b").get<double>();

    judged.credit = doc.at("credit").get<double>();
    judged.strategy = doc.value("strategy", std::string());
    judged.templates = doc.value("templates", std::string());
    for (const json& exchange : doc.at("transcripts"))
      judged.transcripts.push_back(exchange_from_json(exchange));
  } catch (const json::exception& e) {
    throw DataError("malformed_record", std::string("judged sample: ") + e.what());
  }
  return judged;
}

}  // namespace metajudge::strategies
