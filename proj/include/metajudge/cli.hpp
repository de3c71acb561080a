#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metajudge/backend.hpp"
#include "metajudge/clock.hpp"

namespace metajudge::cli {

// Fully resolved description of one evaluation run. Assembled from a run
// manifest (JSON) and/or command-line flags; flags win.
struct EvalPlan {
  std::filesystem::path datasets_file;
  std::filesystem::path backends_file;
  std::string dataset;
  std::string backend;
  std::string strategy;
  double temperature = 0.0;
  bool order_swap = false;
  double inconclusive_credit = 0.0;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path out_dir;
  int max_tokens = 1024;
  int workers = 0;
  bool resume = false;
  // Load prompt templates from this directory instead of the compiled-in set.
  std::optional<std::filesystem::path> prompt_assets;

  void validate() const;
};

// Reads a run manifest; relative paths resolve against the manifest's
// directory. Absent fields keep their defaults.
EvalPlan plan_from_manifest(const std::filesystem::path& manifest_path);

// One entry of backends.json. Credentials never appear here: api_key_env
// names the environment variable that holds the bearer token.
struct BackendSpec {
  std::string name;
  std::string kind;  // "scripted" | "http"
  std::string endpoint;
  std::string model_id;
  std::string api_key_env;
  std::filesystem::path script;  // scripted only: rule table (JSON records)
  bool supports_token_probabilities = false;
  int max_in_flight = 4;
  int requests_per_minute = 600;
  int retry_limit = 3;

  backend::BackendProfile profile() const;
};

std::vector<BackendSpec> read_backend_catalog(const std::filesystem::path& path);
const BackendSpec& find_backend(const std::vector<BackendSpec>& specs, const std::string& name);

struct BuiltBackend {
  std::shared_ptr<backend::BackendClient> client;
  std::shared_ptr<backend::Transport> transport;
};

BuiltBackend make_backend(const BackendSpec& spec,
                          std::shared_ptr<Clock> clock = system_clock());

// Subcommand bodies; each returns the process exit code.
int run_evaluate(const EvalPlan& plan, std::ostream& out, std::ostream& err);
int run_report(const std::vector<std::filesystem::path>& run_dirs, std::ostream& out,
               std::ostream& err);
int run_cache(const std::string& action, const std::filesystem::path& cache_dir,
              std::ostream& out, std::ostream& err);
int run_templates_export(const std::filesystem::path& out_dir, std::ostream& out,
                         std::ostream& err);

// argv entry point. Exit codes: 0 success, 2 configuration, 3 data,
// 4 transport, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace metajudge::cli
