#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metajudge/core.hpp"

namespace metajudge::prompts {

// Template family, selected by the dataset kind: datasets that admit ties use
// the three-option family, datasets that force a choice use the two-option
// family with an evaluation-rules block injected into every judge prompt.
enum class PromptFamily { TwoWay, ThreeWay };

std::string to_string(PromptFamily family);
PromptFamily family_from_string(const std::string& name);

// A strategy is executed as an ordered sequence of phases; each phase is one
// model call backed by one template.
enum class Phase { MetricGen, PointReason, PairReason, FinalJudge, SingleJudge, PairJudge };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);

// Phases a strategy performs, in call order. Phases that run once per output
// (PointReason, PairReason) appear once here; the runner expands them.
std::vector<Phase> phase_sequence(StrategyKind strategy);

struct TemplateKey {
  PromptFamily family;
  StrategyKind strategy;
  Phase phase;

  auto operator<=>(const TemplateKey&) const = default;
};

struct PromptTemplate {
  std::string id;       // stable "<family>/<strategy>/<phase>" identifier
  std::string label;    // revision label, e.g. "v1"
  std::string body;     // text with {placeholder} slots
  std::string version;  // label + "-" + 12-hex content digest

  // Placeholder names appearing in the body, in first-appearance order.
  std::vector<std::string> placeholders() const;
};

// Values available for substitution. Only the placeholders present in a
// template's body must be bound.
struct RenderContext {
  std::optional<std::string> instruction;
  std::optional<std::string> output;
  std::optional<std::string> output_a;
  std::optional<std::string> output_b;
  std::optional<std::string> explanation_a;
  std::optional<std::string> explanation_b;
  std::optional<std::string> metrics;
  // Override for {rules}; unset means the standard rules_text() block.
  std::optional<std::string> rules;
};

// Fills every placeholder in the body. {rules} falls back to rules_text()
// when no override is set; any other unbound placeholder raises ConfigError.
std::string render(const PromptTemplate& tpl, const RenderContext& ctx);

// Evaluation-rules block injected wherever a body contains {rules}.
const std::string& rules_text();

class PromptRegistry {
 public:
  // Registers a template under (family, strategy, phase). The version digest
  // is computed here from the body (and the rules block when referenced).
  void register_template(const TemplateKey& key, std::string label, std::string body);

  // Makes `key` resolve to the template already registered under `target`,
  // sharing the same id and version so downstream identity checks (and cache
  // keys derived from them) coincide.
  void register_alias(const TemplateKey& key, const TemplateKey& target);

  const PromptTemplate& get(const TemplateKey& key) const;
  const PromptTemplate& get(PromptFamily family, StrategyKind strategy, Phase phase) const;

  bool contains(const TemplateKey& key) const;

  // Verifies that every (family, strategy) pair covers its full phase
  // sequence; throws ConfigError naming the first gap.
  void verify_coverage() const;

  // Keys in deterministic order, aliases included.
  std::vector<TemplateKey> keys() const;

  // Distinct templates (aliases collapsed), ordered by id.
  std::vector<const PromptTemplate*> distinct_templates() const;

  // The compiled-in template set.
  static const PromptRegistry& builtin();

  // Loads one file per distinct template from `dir` (front-matter header plus
  // body, as written by export_to) and re-applies the standard aliases.
  static PromptRegistry from_assets_dir(const std::filesystem::path& dir);

  // Writes one file per distinct template into `dir`.
  void export_to(const std::filesystem::path& dir) const;

 private:
  std::map<TemplateKey, PromptTemplate> templates_;
};

}  // namespace metajudge::prompts
