#include "metajudge/cli.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "metajudge/cache.hpp"
#include "metajudge/errors.hpp"
#include "metajudge/http_backend.hpp"
#include "metajudge/ingest.hpp"
#include "metajudge/jsonio.hpp"
#include "metajudge/report.hpp"
#include "metajudge/scripted.hpp"
#include "metajudge/strategies.hpp"

namespace metajudge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base_dir, const fs::path& path) {
  return path.is_absolute() ? path : base_dir / path;
}

std::string utc_now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void EvalPlan::validate() const {
  if (datasets_file.empty())
    throw ConfigError("no dataset catalog given (--datasets-file or manifest)", "bad_plan");
  if (backends_file.empty())
    throw ConfigError("no backend catalog given (--backends-file or manifest)", "bad_plan");
  if (dataset.empty()) throw ConfigError("no dataset selected (--dataset)", "bad_plan");
  if (backend.empty()) throw ConfigError("no backend selected (--backend)", "bad_plan");
  if (strategy.empty()) throw ConfigError("no strategy selected (--strategy)", "bad_plan");
  if (out_dir.empty()) throw ConfigError("no output directory given (--out)", "bad_plan");
  if (!strategy_from_string(strategy)) {
    std::string known;
    for (StrategyKind kind : kAllStrategies)
      known += std::string(known.empty() ? "" : ", ") + to_string(kind);
    throw ConfigError("unknown strategy '" + strategy + "' (known: " + known + ")",
                      "bad_plan");
  }
}

EvalPlan plan_from_manifest(const fs::path& manifest_path) {
  json doc;
  try {
    doc = json::parse(jsonio::read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what(), "bad_manifest");
  }
  if (!doc.is_object())
    throw ConfigError(manifest_path.string() + ": manifest must be a JSON object",
                      "bad_manifest");

  fs::path base = manifest_path.parent_path();
  EvalPlan plan;
  try {
    if (doc.contains("datasets_file"))
      plan.datasets_file = resolve(base, doc.at("datasets_file").get<std::string>());
    if (doc.contains("backends_file"))
      plan.backends_file = resolve(base, doc.at("backends_file").get<std::string>());
    if (doc.contains("dataset")) plan.dataset = doc.at("dataset").get<std::string>();
    if (doc.contains("backend")) plan.backend = doc.at("backend").get<std::string>();
    if (doc.contains("strategy")) plan.strategy = doc.at("strategy").get<std::string>();
    if (doc.contains("temperature")) plan.temperature = doc.at("temperature").get<double>();
    if (doc.contains("order_swap")) plan.order_swap = doc.at("order_swap").get<bool>();
    if (doc.contains("inconclusive_credit"))
      plan.inconclusive_credit = doc.at("inconclusive_credit").get<double>();
    if (doc.contains("cache_dir"))
      plan.cache_dir = resolve(base, doc.at("cache_dir").get<std::string>());
    if (doc.contains("out_dir"))
      plan.out_dir = resolve(base, doc.at("out_dir").get<std::string>());
    if (doc.contains("max_tokens")) plan.max_tokens = doc.at("max_tokens").get<int>();
    if (doc.contains("workers")) plan.workers = doc.at("workers").get<int>();
    if (doc.contains("prompt_assets"))
      plan.prompt_assets = resolve(base, doc.at("prompt_assets").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what(), "bad_manifest");
  }
  return plan;
}

backend::BackendProfile BackendSpec::profile() const {
  backend::BackendProfile profile;
  profile.name = name;
  profile.endpoint = endpoint;
  profile.model_id = model_id;
  profile.api_key_env = api_key_env;
  profile.supports_token_probabilities = supports_token_probabilities;
  profile.max_in_flight = max_in_flight;
  profile.requests_per_minute = requests_per_minute;
  profile.retry_limit = retry_limit;
  return profile;
}

std::vector<BackendSpec> read_backend_catalog(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(jsonio::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what(), "bad_catalog");
  }

  const json* list = nullptr;
  if (doc.is_array()) {
    list = &doc;
  } else if (doc.is_object() && doc.contains("backends") && doc["backends"].is_array()) {
    list = &doc["backends"];
  } else {
    throw ConfigError(path.string() + ": expected {\"backends\": [...]} or an array",
                      "bad_catalog");
  }

  std::vector<BackendSpec> specs;
  std::set<std::string> names;
  for (const json& entry : *list) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("kind"))
      throw ConfigError(path.string() + ": each backend needs name and kind", "bad_catalog");
    BackendSpec spec;
    spec.name = entry.at("name").get<std::string>();
    spec.kind = entry.at("kind").get<std::string>();
    for (const char* field : {"api_key", "token", "secret"}) {
      if (entry.contains(field))
        throw ConfigError(path.string() + ": backend '" + spec.name + "' carries '" +
                              field + "' (credentials never go in the catalog)",
                          "bad_catalog");
    }
    if (spec.kind != "scripted" && spec.kind != "http")
      throw ConfigError(path.string() + ": backend '" + spec.name +
                            "' has unknown kind '" + spec.kind + "'",
                        "bad_catalog");
    spec.endpoint = entry.value("endpoint", "");
    spec.model_id = entry.value("model_id", spec.kind == "scripted" ? "scripted-judge" : "");
    spec.api_key_env = entry.value("api_key_env", "");
    if (entry.contains("script"))
      spec.script = resolve(path.parent_path(), entry.at("script").get<std::string>());
    spec.supports_token_probabilities = entry.value("supports_token_probabilities", false);
    spec.max_in_flight = entry.value("max_in_flight", 4);
    spec.requests_per_minute = entry.value("requests_per_minute", 600);
    spec.retry_limit = entry.value("retry_limit", 3);

    if (spec.kind == "http") {
      if (spec.endpoint.empty())
        throw ConfigError(path.string() + ": http backend '" + spec.name +
                              "' needs an endpoint",
                          "bad_catalog");
      if (spec.api_key_env.empty())
        throw ConfigError(path.string() + ": http backend '" + spec.name +
                              "' needs api_key_env (credentials never go in the catalog)",
                          "bad_catalog");
      if (spec.model_id.empty())
        throw ConfigError(path.string() + ": http backend '" + spec.name +
                              "' needs a model_id",
                          "bad_catalog");
    }
    if (spec.kind == "scripted" && spec.script.empty())
      throw ConfigError(path.string() + ": scripted backend '" + spec.name +
                            "' needs a script file",
                        "bad_catalog");

    if (!names.insert(spec.name).second)
      throw ConfigError(path.string() + ": duplicate backend name '" + spec.name + "'",
                        "bad_catalog");
    specs.push_back(std::move(spec));
  }
  return specs;
}

const BackendSpec& find_backend(const std::vector<BackendSpec>& specs,
                                const std::string& name) {
  for (const auto& spec : specs)
    if (spec.name == name) return spec;
  std::string known;
  for (const auto& spec : specs) known += (known.empty() ? "" : ", ") + spec.name;
  throw ConfigError("unknown backend '" + name + "' (known: " + known + ")", "bad_catalog");
}

BuiltBackend make_backend(const BackendSpec& spec, std::shared_ptr<Clock> clock) {
  BuiltBackend built;
  if (spec.kind == "scripted") {
    built.transport = backend::ScriptedTransport::from_file(spec.script, clock);
  } else {
    built.transport = std::make_shared<backend::HttpTransport>();
  }
  built.client = std::make_shared<backend::BackendClient>(spec.profile(), built.transport,
                                                          std::move(clock));
  return built;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int run_evaluate(const EvalPlan& plan, std::ostream& out, std::ostream& err) {
  plan.validate();
  StrategyKind strategy = *strategy_from_string(plan.strategy);

  auto started_at = utc_now_iso8601();
  auto t0 = std::chrono::steady_clock::now();

  ingest::Dataset dataset = ingest::load_from_catalog(plan.datasets_file, plan.dataset);
  const auto backends = read_backend_catalog(plan.backends_file);
  const BackendSpec& backend_spec = find_backend(backends, plan.backend);
  BuiltBackend built = make_backend(backend_spec);

  prompts::PromptRegistry loaded;
  const prompts::PromptRegistry* registry = &prompts::PromptRegistry::builtin();
  if (plan.prompt_assets) {
    loaded = prompts::PromptRegistry::from_assets_dir(*plan.prompt_assets);
    loaded.verify_coverage();
    registry = &loaded;
  }

  std::shared_ptr<cache::ReasoningStore> store;
  if (plan.cache_dir) store = std::make_shared<cache::ReasoningStore>(*plan.cache_dir);

  strategies::RunConfig config;
  config.strategy = strategy;
  config.temperature = plan.temperature;
  config.order_swap = plan.order_swap;
  config.inconclusive_credit = plan.inconclusive_credit;
  config.max_tokens = plan.max_tokens;
  config.workers = plan.workers;

  strategies::StrategyRunner runner(*registry, built.client, store, config);
  runner.preflight(dataset.kind);

  // Resume: skip samples already judged under the same strategy and template
  // versions; anything judged differently is re-run.
  prompts::PromptFamily family = dataset.kind.tie_allowed ? prompts::PromptFamily::ThreeWay
                                                          : prompts::PromptFamily::TwoWay;
  std::string stamp = strategies::template_stamp(*registry, family, strategy);
  std::map<std::string, strategies::JudgedSample> resumed;
  fs::path judgments_path = plan.out_dir / "judgments.jsonl";
  if (plan.resume && fs::exists(judgments_path)) {
    for (const json& line : jsonio::read_records(judgments_path)) {
      strategies::JudgedSample judged = strategies::judged_from_json(line);
      if (judged.strategy != plan.strategy || judged.templates != stamp) continue;
      resumed.emplace(judged.sample_id, std::move(judged));
    }
  }

  std::vector<EvalSample> to_run;
  for (const auto& sample : dataset.samples)
    if (!resumed.count(sample.id)) to_run.push_back(sample);

  if (!resumed.empty())
    err << "resuming: " << resumed.size() << " judged, " << to_run.size() << " to go\n";

  strategies::RunResult result = strategies::run_evaluation(
      to_run, runner, [&](std::size_t done, std::size_t total) {
        if (done == total || done % 25 == 0)
          err << "judged " << done << "/" << total << "\n";
      });

  std::map<std::string, const strategies::JudgedSample*> fresh;
  for (const auto& judged : result.judged) fresh.emplace(judged.sample_id, &judged);

  std::vector<strategies::JudgedSample> merged;
  merged.reserve(dataset.samples.size());
  for (const auto& sample : dataset.samples) {
    auto it = resumed.find(sample.id);
    if (it != resumed.end()) {
      merged.push_back(it->second);
    } else {
      merged.push_back(*fresh.at(sample.id));
    }
  }

  report::ReportMeta meta;
  meta.dataset = dataset.kind.name;
  meta.backend = backend_spec.name;
  meta.model = backend_spec.model_id;
  meta.strategy = plan.strategy;
  meta.temperature = plan.temperature;
  meta.order_swap = plan.order_swap;
  meta.inconclusive_credit = plan.inconclusive_credit;
  report::EvalReport eval_report = report::build_report(merged, meta);

  auto elapsed_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  json run_meta{{"started_at", started_at},
                {"elapsed_ms", elapsed_ms},
                {"samples_judged", to_run.size()},
                {"samples_resumed", resumed.size()},
                {"tool", "metajudge"}};

  report::write_run_artifacts(plan.out_dir, eval_report, merged, run_meta);
  if (store) store->write_run_log();
  out << report::report_to_text(eval_report);
  if (plan.order_swap)
    out << "swap consistency: " << report::swap_consistency_pct(merged) << "%\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report / cache / templates
// ---------------------------------------------------------------------------

int run_report(const std::vector<fs::path>& run_dirs, std::ostream& out, std::ostream& err) {
  (void)err;
  std::vector<report::EvalReport> reports;
  for (const auto& dir : run_dirs) {
    fs::path path = dir / "report.json";
    json doc;
    try {
      doc = json::parse(jsonio::read_file(path));
    } catch (const json::exception& e) {
      throw DataError("malformed_record", path.string() + ": " + e.what());
    }
    reports.push_back(report::report_from_json(doc));
  }

  out << report::comparison_to_text(report::compare_strategies(reports));
  return 0;
}

int run_cache(const std::string& action, const fs::path& cache_dir, std::ostream& out,
              std::ostream& err) {
  if ((action == "stats" || action == "verify") && !fs::is_directory(cache_dir))
    throw ConfigError("cache directory '" + cache_dir.string() + "' does not exist",
                      "bad_plan");

  cache::ReasoningStore store(cache_dir);
  if (action == "stats") {
    cache::CacheStats stats = store.stats();
    out << "entries: " << stats.entries << "\n"
        << "shards: " << stats.shards << "\n"
        << "bytes: " << stats.bytes << "\n";
    if (stats.last_run_hits)
      out << "last run: " << *stats.last_run_hits << " hits, " << *stats.last_run_misses
          << " misses\n";
    return 0;
  }
  if (action == "verify") {
    std::vector<std::string> problems;
    std::size_t bad = store.verify(&problems);
    for (const auto& problem : problems) err << problem << "\n";
    out << "checked store at " << cache_dir.string() << ": " << bad << " bad entries\n";
    return bad == 0 ? 0 : exit_code_for(ErrorCategory::Store);
  }
  if (action == "purge") {
    std::size_t removed = store.purge();
    out << "purged " << removed << " entries\n";
    return 0;
  }
  throw ConfigError("unknown cache action '" + action + "'", "bad_plan");
}

int run_templates_export(const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  (void)err;
  const auto& registry = prompts::PromptRegistry::builtin();
  registry.export_to(out_dir);
  out << "wrote " << registry.distinct_templates().size() << " templates to "
      << out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// argv entry point
// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Meta-evaluation harness for LLM judge strategies"};
  app.require_subcommand(1);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run one judge evaluation");
  std::string manifest, dataset, backend_name, strategy, cache_dir, out_dir, prompt_assets;
  std::string datasets_file, backends_file;
  double temperature = 0.0, inconclusive_credit = 0.0;
  int max_tokens = 0, workers = -1;
  bool resume = false;
  auto* opt_manifest = evaluate->add_option("--manifest", manifest, "Run manifest (JSON)");
  auto* opt_datasets = evaluate->add_option("--datasets-file", datasets_file,
                                            "Dataset catalog (datasets.json)");
  auto* opt_backends = evaluate->add_option("--backends-file", backends_file,
                                            "Backend catalog (backends.json)");
  auto* opt_dataset = evaluate->add_option("--dataset", dataset, "Dataset name");
  auto* opt_backend = evaluate->add_option("--backend", backend_name, "Backend name");
  auto* opt_strategy = evaluate->add_option("--strategy", strategy, "Judge strategy");
  auto* opt_temperature =
      evaluate->add_option("--temperature", temperature, "Sampling temperature");
  auto* opt_swap = evaluate->add_flag("--order-swap,!--no-order-swap",
                                      "Judge twice with outputs swapped");
  auto* opt_credit = evaluate->add_option("--inconclusive-credit", inconclusive_credit,
                                          "Credit for inconclusive verdicts");
  auto* opt_cache = evaluate->add_option("--cache", cache_dir, "Reasoning cache directory");
  auto* opt_out = evaluate->add_option("--out", out_dir, "Output directory");
  auto* opt_max_tokens = evaluate->add_option("--max-tokens", max_tokens, "Completion cap");
  auto* opt_workers = evaluate->add_option("--workers", workers, "Worker threads");
  evaluate->add_flag("--resume", resume, "Skip samples already in judgments.jsonl");
  auto* opt_assets =
      evaluate->add_option("--prompts", prompt_assets, "Prompt assets directory");

  // report
  auto* report_cmd =
      app.add_subcommand("report", "Re-render or compare finished runs");
  std::vector<std::string> run_dirs;
  report_cmd->add_option("runs", run_dirs, "Run output directories")->required();

  // cache
  auto* cache_cmd = app.add_subcommand("cache", "Inspect the reasoning cache");
  std::string cache_action, cache_root;
  cache_cmd->add_option("action", cache_action, "stats | verify | purge")
      ->required()
      ->check(CLI::IsMember({"stats", "verify", "purge"}));
  cache_cmd->add_option("--cache", cache_root, "Cache directory")->required();

  // templates
  auto* templates_cmd = app.add_subcommand("templates", "Prompt template utilities");
  auto* export_cmd = templates_cmd->add_subcommand("export", "Write the built-in set");
  std::string templates_out;
  export_cmd->add_option("--out", templates_out, "Destination directory")->required();
  templates_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code_for(ErrorCategory::Config);
  }

  try {
    if (*evaluate) {
      EvalPlan plan;
      if (*opt_manifest) plan = plan_from_manifest(manifest);
      if (*opt_datasets) plan.datasets_file = datasets_file;
      if (*opt_backends) plan.backends_file = backends_file;
      if (*opt_dataset) plan.dataset = dataset;
      if (*opt_backend) plan.backend = backend_name;
      if (*opt_strategy) plan.strategy = strategy;
      if (*opt_temperature) plan.temperature = temperature;
      if (opt_swap->count() > 0) plan.order_swap = opt_swap->as<bool>();
      if (*opt_credit) plan.inconclusive_credit = inconclusive_credit;
      if (*opt_cache) plan.cache_dir = cache_dir;
      if (*opt_out) plan.out_dir = out_dir;
      if (*opt_max_tokens) plan.max_tokens = max_tokens;
      if (*opt_workers) plan.workers = workers;
      if (resume) plan.resume = true;
      if (*opt_assets) plan.prompt_assets = prompt_assets;
      return run_evaluate(plan, std::cout, std::cerr);
    }
    if (*report_cmd) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      return run_report(dirs, std::cout, std::cerr);
    }
    if (*cache_cmd) return run_cache(cache_action, cache_root, std::cout, std::cerr);
    if (*export_cmd) return run_templates_export(templates_out, std::cout, std::cerr);
    return exit_code_for(ErrorCategory::Config);
  } catch (const Error& e) {
    std::cerr << "error (" << category_name(e.category()) << "/" << e.code()
              << "): " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace metajudge::cli
