// Acceptance gate: seven checks over the assembled harness, one line each.
// A nonzero exit means at least one gating check failed; the optional live
// backend probe (check 8) reports but never gates.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metajudge/backend.hpp"
#include "metajudge/cache.hpp"
#include "metajudge/errors.hpp"
#include "metajudge/http_backend.hpp"
#include "metajudge/ingest.hpp"
#include "metajudge/jsonio.hpp"
#include "metajudge/parse.hpp"
#include "metajudge/prompts.hpp"
#include "metajudge/report.hpp"
#include "metajudge/scripted.hpp"
#include "metajudge/strategies.hpp"

namespace {

namespace fs = std::filesystem;
using namespace metajudge;
using nlohmann::json;
using strategies::JudgedSample;
using strategies::RunConfig;
using strategies::StrategyRunner;

const fs::path kFixtures = METAJUDGE_FIXTURE_DIR;

// --------------------------------------------------------------------------
// Small shared helpers
// --------------------------------------------------------------------------

struct CheckFailure {
  std::string detail;
};

void require(bool condition, const std::string& detail) {
  if (!condition) throw CheckFailure{detail};
}

template <typename T>
std::string str(const T& value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

void require_near(double actual, double expected, double tolerance,
                  const std::string& what) {
  require(std::abs(actual - expected) <= tolerance,
          what + ": got " + str(actual) + ", expected " + str(expected) + " (±" +
              str(tolerance) + ")");
}

backend::BackendProfile scripted_profile(const std::string& model_id, bool token_probs) {
  backend::BackendProfile profile;
  profile.name = "scripted-judge";
  profile.model_id = model_id;
  profile.supports_token_probabilities = token_probs;
  profile.max_in_flight = 4;
  profile.requests_per_minute = 6000;
  profile.retry_limit = 2;
  return profile;
}

struct Rig {
  ingest::Dataset dataset;
  std::shared_ptr<backend::ScriptedTransport> transport;
  std::shared_ptr<backend::BackendClient> client;

  Rig(const fs::path& catalog, const std::string& dataset_name, const fs::path& rules,
      const std::string& model_id, bool token_probs = true)
      : dataset(ingest::load_from_catalog(catalog, dataset_name)),
        transport(backend::ScriptedTransport::from_file(rules)),
        client(std::make_shared<backend::BackendClient>(
            scripted_profile(model_id, token_probs), transport)) {}
};

char choice_letter(Choice choice) {
  switch (choice) {
    case Choice::A: return 'A';
    case Choice::B: return 'B';
    case Choice::Tie: return 'T';
    case Choice::Inconclusive: return 'I';
  }
  return '?';
}

// --------------------------------------------------------------------------
// Check 1: published four-subset accuracy table
// --------------------------------------------------------------------------

std::vector<JudgedSample> synthetic_block(const std::string& subset, std::size_t correct,
                                          std::size_t total, std::size_t* serial) {
  std::vector<JudgedSample> judged;
  for (std::size_t i = 0; i < total; ++i) {
    JudgedSample sample;
    sample.sample_id = "R" + std::to_string(++*serial);
    sample.subset = subset;
    sample.label = PreferenceLabel::A;
    bool hit = i < correct;
    sample.verdict.choice = hit ? Choice::A : Choice::B;
    sample.credit = hit ? 1.0 : 0.0;
    judged.push_back(std::move(sample));
  }
  return judged;
}

void check_published_aggregation() {
  struct Row {
    const char* strategy;
    std::size_t correct[4];
    double subset_pct[4];
    double overall_pct;
  };
  // Subset sizes and the accuracy table both rows must reproduce.
  const std::size_t totals[4] = {46, 92, 47, 134};
  const char* subsets[4] = {"knowledge", "common_sense", "symbolic", "coding"};
  const Row rows[] = {
      {"prepair", {24, 59, 23, 67}, {52.17, 64.13, 48.94, 50.00}, 54.23},
      {"pairwise", {19, 31, 19, 46}, {41.30, 33.70, 40.43, 34.33}, 36.05},
  };

  for (const Row& row : rows) {
    std::size_t serial = 0;
    std::vector<JudgedSample> judged;
    for (int i = 0; i < 4; ++i) {
      auto block = synthetic_block(subsets[i], row.correct[i], totals[i], &serial);
      judged.insert(judged.end(), block.begin(), block.end());
    }

    report::ReportMeta meta;
    meta.dataset = "benchmark";
    meta.backend = "judge";
    meta.model = "judge";
    meta.strategy = row.strategy;
    report::EvalReport rep = report::build_report(judged, meta);

    require(rep.sample_count == 319, std::string(row.strategy) + ": sample count");
    require_near(rep.accuracy_pct, row.overall_pct, 0.01,
                 std::string(row.strategy) + " overall accuracy");
    for (int i = 0; i < 4; ++i) {
      auto it = std::find_if(rep.subsets.begin(), rep.subsets.end(),
                             [&](const auto& s) { return s.subset == subsets[i]; });
      require(it != rep.subsets.end(), std::string("missing subset ") + subsets[i]);
      require_near(it->accuracy_pct, row.subset_pct[i], 0.01,
                   std::string(row.strategy) + " " + subsets[i]);
    }

    // The overall number is the sample-weighted micro average, not the mean
    // of the subset percentages.
    double credit = 0.0;
    for (const auto& s : rep.subsets) credit += s.credit;
    require_near(rep.accuracy_pct, 100.0 * credit / 319.0, 1e-9,
                 std::string(row.strategy) + " micro-average identity");
  }
}

// --------------------------------------------------------------------------
// Check 2: weighted-sum scoring against a brute-force oracle
// --------------------------------------------------------------------------

void check_weighted_sum_oracle() {
  std::mt19937_64 rng(96488);
  std::uniform_int_distribution<int> support_size(1, 5);
  std::uniform_real_distribution<double> raw_mass(0.01, 1.0);

  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> scores{1, 2, 3, 4, 5};
    std::shuffle(scores.begin(), scores.end(), rng);
    scores.resize(support_size(rng));

    std::map<int, double> mass;
    double total = 0.0;
    for (int score : scores) total += (mass[score] = raw_mass(rng));
    for (auto& [score, p] : mass) p /= total;

    double expected = 0.0;
    for (int score = 1; score <= 5; ++score)
      if (mass.count(score)) expected += score * mass.at(score);

    double actual = strategies::weighted_sum(parse::ScoreDistribution::make(mass));
    require(std::abs(actual - expected) <= 1e-12,
            "trial " + str(trial) + ": weighted sum " + str(actual) + " vs oracle " +
                str(expected));
  }

  std::uniform_real_distribution<double> dense_mass(0.05, 1.0);
  std::uniform_real_distribution<double> fraction(0.1, 0.9);
  for (int trial = 0; trial < 1000; ++trial) {
    std::map<int, double> mass;
    double total = 0.0;
    for (int score = 1; score <= 5; ++score) total += (mass[score] = dense_mass(rng));
    for (auto& [score, p] : mass) p /= total;

    std::uniform_int_distribution<int> lower_pick(1, 4);
    int lower = lower_pick(rng);
    std::uniform_int_distribution<int> higher_pick(lower + 1, 5);
    int higher = higher_pick(rng);

    std::map<int, double> shifted = mass;
    double moved = shifted[lower] * fraction(rng);
    shifted[lower] -= moved;
    shifted[higher] += moved;

    double before = strategies::weighted_sum(parse::ScoreDistribution::make(mass));
    double after = strategies::weighted_sum(parse::ScoreDistribution::make(shifted));
    require(after > before, "trial " + str(trial) +
                                ": shifting mass upward did not raise the sum (" +
                                str(before) + " -> " + str(after) + ")");
  }
}

// --------------------------------------------------------------------------
// Check 3: scripted end-to-end over every strategy
// --------------------------------------------------------------------------

void check_scripted_end_to_end(std::vector<std::string>* table) {
  json expected = json::parse(jsonio::read_file(kFixtures / "e2e" / "expected.json"));

  table->push_back("strategy        calls/sample  accuracy  verdicts");
  for (StrategyKind strategy : kAllStrategies) {
    const std::string name = to_string(strategy);
    const json& want = expected.at(name);

    Rig rig(kFixtures / "e2e" / "datasets.json", "synthbar",
            kFixtures / "e2e" / "rules.jsonl", "scripted-judge");
    RunConfig config;
    config.strategy = strategy;
    StrategyRunner runner(prompts::PromptRegistry::builtin(), rig.client, nullptr, config);
    runner.preflight(rig.dataset.kind);
    strategies::RunResult result = strategies::run_evaluation(rig.dataset.samples, runner);

    std::string letters;
    for (const auto& judged : result.judged) letters += choice_letter(judged.verdict.choice);
    require(letters == want.at("verdicts").get<std::string>(),
            name + ": verdicts " + letters + " != " +
                want.at("verdicts").get<std::string>());

    int calls_per_sample = want.at("calls_per_sample").get<int>();
    require(rig.transport->call_count() == 12 * calls_per_sample,
            name + ": " + str(rig.transport->call_count()) + " model calls, expected " +
                str(12 * calls_per_sample));

    report::ReportMeta meta;
    meta.dataset = "synthbar";
    meta.backend = "scripted-judge";
    meta.model = "scripted-judge";
    meta.strategy = name;
    report::EvalReport rep = report::build_report(result.judged, meta);
    require_near(rep.accuracy_pct, want.at("accuracy_pct").get<double>(), 0.01,
                 name + " accuracy");
    for (const auto& [subset, pct] : want.at("subsets").items()) {
      auto it = std::find_if(rep.subsets.begin(), rep.subsets.end(),
                             [&](const auto& s) { return s.subset == subset; });
      require(it != rep.subsets.end(), name + ": missing subset " + subset);
      require_near(it->accuracy_pct, pct.get<double>(), 0.01, name + " " + subset);
    }

    char line[128];
    std::snprintf(line, sizeof(line), "%-15s %12d %8.2f%%  %s", name.c_str(),
                  calls_per_sample, rep.accuracy_pct, letters.c_str());
    table->push_back(line);
  }
}

// --------------------------------------------------------------------------
// Check 4: reasoning-cache contract
// --------------------------------------------------------------------------

void check_cache_contract() {
  fs::path store_root = fs::temp_directory_path() /
                        ("acceptance_store_" + std::to_string(::getpid()));
  fs::remove_all(store_root);

  auto judge_all = [&](std::shared_ptr<cache::ReasoningStore> store,
                       std::shared_ptr<backend::ScriptedTransport>* transport_out) {
    Rig rig(kFixtures / "cachefix" / "datasets.json", "cachepairs",
            kFixtures / "cachefix" / "rules.jsonl", "scripted-judge-1");
    RunConfig config;
    config.strategy = StrategyKind::PRePair;
    StrategyRunner runner(prompts::PromptRegistry::builtin(), rig.client, store, config);
    strategies::RunResult result = strategies::run_evaluation(rig.dataset.samples, runner);
    *transport_out = rig.transport;
    std::string letters;
    for (const auto& judged : result.judged) letters += choice_letter(judged.verdict.choice);
    return letters;
  };

  // Cold run: 8 samples share 5 distinct (instruction, output) pairs, so the
  // 16 reasoning slots must collapse to exactly 5 model calls.
  auto store = std::make_shared<cache::ReasoningStore>(store_root);
  std::shared_ptr<backend::ScriptedTransport> transport;
  std::string cached_letters = judge_all(store, &transport);
  require(transport->call_count_with_tag("point_reason") == 5,
          "cold run issued " + str(transport->call_count_with_tag("point_reason")) +
              " reasoning calls, expected 5");
  require(transport->call_count_with_tag("final_judge") == 8,
          "cold run issued " + str(transport->call_count_with_tag("final_judge")) +
              " final judgments, expected 8");
  require(store->run_hits() + store->run_misses() == 16,
          "store saw " + str(store->run_hits() + store->run_misses()) +
              " lookups, expected 16");
  require(store->run_misses() == 5, "store computed " + str(store->run_misses()) +
                                        " entries, expected 5");

  // The same dataset judged with no store attached reaches identical verdicts.
  std::shared_ptr<backend::ScriptedTransport> uncached_transport;
  std::string uncached_letters = judge_all(nullptr, &uncached_transport);
  require(cached_letters == uncached_letters,
          "verdicts differ with cache on/off: " + cached_letters + " vs " +
              uncached_letters);
  require(uncached_transport->call_count_with_tag("point_reason") == 16,
          "store-less run must issue all 16 reasoning calls");

  // Restart: a new process over the same directory replays everything.
  auto reopened = std::make_shared<cache::ReasoningStore>(store_root);
  std::shared_ptr<backend::ScriptedTransport> warm_transport;
  std::string warm_letters = judge_all(reopened, &warm_transport);
  require(warm_letters == cached_letters, "verdicts changed after restart");
  require(warm_transport->call_count_with_tag("point_reason") == 0,
          "warm run issued " + str(warm_transport->call_count_with_tag("point_reason")) +
              " reasoning calls, expected 0");
  require(reopened->run_hits() == 16, "warm run had " + str(reopened->run_hits()) +
                                          " hits, expected 16");
  require(reopened->stats().entries == 5,
          "store holds " + str(reopened->stats().entries) + " entries, expected 5");

  fs::remove_all(store_root);
}

// --------------------------------------------------------------------------
// Check 5: verdict-parser corpus
// --------------------------------------------------------------------------

void check_parser_corpus() {
  std::vector<json> cases = jsonio::read_records(kFixtures / "parser_corpus.jsonl");
  require(cases.size() >= 30, "corpus holds " + str(cases.size()) + " cases, need >= 30");

  std::size_t error_cases = 0;
  bool decision_form = false;
  bool prose_form = false;

  for (const json& c : cases) {
    const std::string name = c.at("name").get<std::string>();
    const std::string kind = c.at("kind").get<std::string>();
    const std::string text = c.at("text").get<std::string>();
    if (text.find("Decision: Output (b)") != std::string::npos) decision_form = true;
    if (text.find("Therefore, Output B is better.") != std::string::npos) prose_form = true;

    try {
      if (kind == "pairwise") {
        const bool tie_allowed = c.at("tie_allowed").get<bool>();
        if (c.contains("expect")) {
          auto want = choice_from_string(c.at("expect").get<std::string>());
          Choice got = parse::parse_pairwise_verdict(text, tie_allowed);
          require(want && got == *want, name + ": wrong verdict");
        } else {
          ++error_cases;
          const std::string want_code = c.at("error").get<std::string>();
          try {
            parse::parse_pairwise_verdict(text, tie_allowed);
            require(false, name + ": expected error " + want_code);
          } catch (const ParseError& e) {
            require(e.code() == want_code,
                    name + ": error " + e.code() + " != " + want_code);
          }
        }
      } else {
        if (c.contains("expect")) {
          require(parse::parse_likert_score(text) == c.at("expect").get<int>(),
                  name + ": wrong score");
        } else {
          ++error_cases;
          const std::string want_code = c.at("error").get<std::string>();
          try {
            parse::parse_likert_score(text);
            require(false, name + ": expected error " + want_code);
          } catch (const ParseError& e) {
            require(e.code() == want_code,
                    name + ": error " + e.code() + " != " + want_code);
          }
        }
      }
    } catch (const ParseError& e) {
      require(false, name + ": unexpected ParseError " + e.code());
    }
  }

  require(decision_form, "corpus lost the canonical decision-line form");
  require(prose_form, "corpus lost the prose 'Output B is better' form");
  require(error_cases >= 4, "corpus holds only " + str(error_cases) + " error cases");
}

// --------------------------------------------------------------------------
// Check 6: reasoning-prompt isolation
// --------------------------------------------------------------------------

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++count;
  return count;
}

void check_prompt_isolation() {
  Rig rig(kFixtures / "e2e" / "datasets.json", "synthbar",
          kFixtures / "e2e" / "rules.jsonl", "scripted-judge");

  RunConfig isolated_config;
  isolated_config.strategy = StrategyKind::PRePair;
  StrategyRunner isolated(prompts::PromptRegistry::builtin(), rig.client, nullptr,
                          isolated_config);
  RunConfig pair_config;
  pair_config.strategy = StrategyKind::PRePairStar;
  StrategyRunner pair_visible(prompts::PromptRegistry::builtin(), rig.client, nullptr,
                              pair_config);

  for (const auto& sample : rig.dataset.samples) {
    std::string marker_a = "[QO-" + sample.id + "-A]";
    std::string marker_b = "[QO-" + sample.id + "-B]";

    JudgedSample judged = isolated.judge(sample);
    for (const auto& exchange : judged.transcripts) {
      if (exchange.phase != "point_reason") continue;
      std::string prompt = exchange.request.rendered_text();
      std::size_t total = count_occurrences(prompt, marker_a) +
                          count_occurrences(prompt, marker_b);
      require(total == 1, sample.id + ": isolated reasoning prompt shows " + str(total) +
                              " outputs, expected exactly 1");
    }

    JudgedSample star = pair_visible.judge(sample);
    for (const auto& exchange : star.transcripts) {
      if (exchange.phase != "pair_reason") continue;
      std::string prompt = exchange.request.rendered_text();
      require(count_occurrences(prompt, marker_a) == 1 &&
                  count_occurrences(prompt, marker_b) == 1,
              sample.id + ": pair-visible reasoning prompt must show both outputs once");
    }
  }
}

// --------------------------------------------------------------------------
// Check 7: capability enforcement before any network call
// --------------------------------------------------------------------------

void check_capability_enforcement() {
  Rig rig(kFixtures / "e2e" / "datasets.json", "synthbar",
          kFixtures / "e2e" / "rules.jsonl", "scripted-judge", /*token_probs=*/false);
  RunConfig config;
  config.strategy = StrategyKind::Pointwise;
  StrategyRunner runner(prompts::PromptRegistry::builtin(), rig.client, nullptr, config);

  bool rejected = false;
  try {
    runner.preflight(rig.dataset.kind);
  } catch (const CapabilityError&) {
    rejected = true;
  }
  require(rejected, "preflight accepted a scoring mode the backend cannot serve");
  require(rig.transport->call_count() == 0,
          "capability check ran " + str(rig.transport->call_count()) +
              " transport calls, expected 0");
}

// --------------------------------------------------------------------------
// Check 8 (optional, never gates): live backend probe
// --------------------------------------------------------------------------

bool live_check_configured() {
  return std::getenv("METAJUDGE_LIVE_ENDPOINT") && std::getenv("METAJUDGE_LIVE_MODEL") &&
         std::getenv("METAJUDGE_LIVE_API_KEY_ENV");
}

void check_live_backend() {
  backend::BackendProfile profile;
  profile.name = "live";
  profile.endpoint = std::getenv("METAJUDGE_LIVE_ENDPOINT");
  profile.model_id = std::getenv("METAJUDGE_LIVE_MODEL");
  profile.api_key_env = std::getenv("METAJUDGE_LIVE_API_KEY_ENV");
  profile.max_in_flight = 1;
  profile.requests_per_minute = 30;
  profile.retry_limit = 1;

  auto client = std::make_shared<backend::BackendClient>(
      profile, std::make_shared<backend::HttpTransport>());

  EvalSample sample;
  sample.id = "live-1";
  sample.dataset = DatasetKind{"live", false, false};
  sample.instruction = "Reply with the single word 'yes' or 'no': is water wet?";
  sample.output_a = "yes";
  sample.output_b = "The question of wetness is philosophically rich...";
  sample.label = PreferenceLabel::A;

  RunConfig config;
  config.strategy = StrategyKind::Pairwise;
  config.max_tokens = 64;
  StrategyRunner runner(prompts::PromptRegistry::builtin(), client, nullptr, config);
  JudgedSample judged = runner.judge(sample);
  require(judged.verdict.choice == Choice::A || judged.verdict.choice == Choice::B,
          "live judge returned no usable verdict");
}

}  // namespace

int main() {
  struct Check {
    int number;
    std::string title;
    std::function<void()> body;
  };

  std::vector<std::string> call_table;
  const Check checks[] = {
      {1, "published four-subset accuracy table reproduced (±0.01)",
       check_published_aggregation},
      {2, "weighted-sum scoring matches the brute-force oracle (1000+1000 trials)",
       check_weighted_sum_oracle},
      {3, "scripted end-to-end run: verdicts, accuracies, and call counts",
       [&] { check_scripted_end_to_end(&call_table); }},
      {4, "reasoning cache: 5 computations for 16 slots, stable across restart",
       check_cache_contract},
      {5, "verdict-parser corpus: 30+ surface forms including common phrasings",
       check_parser_corpus},
      {6, "reasoning prompts isolate or pair outputs exactly as configured",
       check_prompt_isolation},
      {7, "capability gaps are rejected before any transport call",
       check_capability_enforcement},
  };

  int failures = 0;
  for (const Check& check : checks) {
    try {
      check.body();
      std::cout << "PASS criterion " << check.number << ": " << check.title << "\n";
    } catch (const CheckFailure& failure) {
      ++failures;
      std::cout << "FAIL criterion " << check.number << ": " << check.title << " — "
                << failure.detail << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL criterion " << check.number << ": " << check.title << " — "
                << e.what() << "\n";
    }
    if (check.number == 3)
      for (const auto& line : call_table) std::cout << "    " << line << "\n";
  }

  if (!live_check_configured()) {
    std::cout << "SKIP criterion 8: live backend probe (set METAJUDGE_LIVE_ENDPOINT, "
                 "METAJUDGE_LIVE_MODEL, METAJUDGE_LIVE_API_KEY_ENV to enable)\n";
  } else {
    try {
      check_live_backend();
      std::cout << "PASS criterion 8: live backend probe\n";
    } catch (const std::exception& e) {
      std::cout << "WARN criterion 8: live backend probe failed (non-gating) — "
                << e.what() << "\n";
    }
  }

  return failures == 0 ? 0 : 1;
}
