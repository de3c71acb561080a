#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "metajudge/backend.hpp"
#include "metajudge/cache.hpp"
#include "metajudge/core.hpp"
#include "metajudge/parse.hpp"
#include "metajudge/prompts.hpp"

namespace metajudge::strategies {

struct RunConfig {
  StrategyKind strategy = StrategyKind::Pairwise;
  double temperature = 0.0;
  // Judge each sample twice, with the outputs swapped on the second pass;
  // disagreeing passes yield an Inconclusive verdict.
  bool order_swap = false;
  // Credit granted when no verdict could be reached (0 = strict, 0.5 =
  // random-guess credit).
  double inconclusive_credit = 0.0;
  int max_tokens = 1024;
  // Worker threads for the sample loop; 0 = use the backend's max_in_flight.
  int workers = 0;

  void validate() const;
};

// Everything recorded about one judged sample: the reconciled verdict, the
// credit it earns against the human label, and a verbatim transcript of every
// model exchange (cache replays included, flagged as such). `strategy` and
// `templates` identify how the verdict was produced, so resumed runs only
// reuse records made under the same strategy and template versions.
struct JudgedSample {
  std::string sample_id;
  std::string subset;  // subset key, "(none)" when untagged
  PreferenceLabel label = PreferenceLabel::A;
  Verdict verdict;
  double credit = 0.0;
  std::string strategy;
  std::string templates;  // template_stamp of the phases that produced this
  std::vector<backend::ChatExchange> transcripts;
};

// Expected probability of the score distribution: sum of score * p(score).
double weighted_sum(const parse::ScoreDistribution& dist);

// "id@version" of every phase template the strategy uses for this family,
// joined with ";" in phase order. Changes whenever any template body changes.
std::string template_stamp(const prompts::PromptRegistry& registry,
                           prompts::PromptFamily family, StrategyKind strategy);

class StrategyRunner {
 public:
  // `store` may be null: reasoning phases then always issue fresh calls.
  StrategyRunner(const prompts::PromptRegistry& registry,
                 std::shared_ptr<backend::BackendClient> client,
                 std::shared_ptr<cache::ReasoningStore> store, RunConfig config);

  const RunConfig& config() const { return config_; }

  // Worker-pool width when RunConfig::workers is 0: the backend's
  // max_in_flight, so the pool never outnumbers the request gate.
  int default_workers() const;

  // Fails fast — before any model call — when the configuration cannot work:
  // missing templates, or a scoring mode needing token probabilities the
  // backend cannot produce.
  void preflight(const DatasetKind& kind) const;

  // One judging pass in presented order; transcripts are appended in call
  // order. Parse failures become Inconclusive verdicts, transport and
  // configuration failures propagate.
  Verdict judge_once(const EvalSample& sample, std::vector<backend::ChatExchange>& transcripts);

  // Full treatment including the optional swapped second pass.
  JudgedSample judge(const EvalSample& sample);

 private:
  prompts::PromptFamily family_for(const DatasetKind& kind) const;

  const prompts::PromptRegistry& registry_;
  std::shared_ptr<backend::BackendClient> client_;
  std::shared_ptr<cache::ReasoningStore> store_;
  RunConfig config_;
};

struct RunResult {
  std::vector<JudgedSample> judged;  // same order as the input samples
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Judges every sample on a worker pool, preserving input order in the result.
// The first propagated error aborts the run.
RunResult run_evaluation(const std::vector<EvalSample>& samples, StrategyRunner& runner,
                         const ProgressFn& progress = nullptr);

// Round-trip serialization for judgments.jsonl.
nlohmann::json judged_to_json(const JudgedSample& judged);
JudgedSample judged_from_json(const nlohmann::json& doc);

}  // namespace metajudge::strategies
