#include "metajudge/prompts.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "metajudge/digest.hpp"
#include "metajudge/errors.hpp"

namespace metajudge::prompts {

namespace {

constexpr std::array<std::pair<PromptFamily, const char*>, 2> kFamilyNames{{
    {PromptFamily::TwoWay, "two_way"},
    {PromptFamily::ThreeWay, "three_way"},
}};

constexpr std::array<std::pair<Phase, const char*>, 6> kPhaseNames{{
    {Phase::MetricGen, "metric_gen"},
    {Phase::PointReason, "point_reason"},
    {Phase::PairReason, "pair_reason"},
    {Phase::FinalJudge, "final_judge"},
    {Phase::SingleJudge, "single_judge"},
    {Phase::PairJudge, "pair_judge"},
}};

// Placeholder names, longest first so "{output_a}" is never read as
// "{output}" plus stray text.
const std::vector<std::string>& placeholder_names() {
  static const std::vector<std::string> names = {
      "explanation_a", "explanation_b", "instruction", "output_a",
      "output_b",      "metrics",       "output",      "rules",
  };
  return names;
}

std::optional<std::string> lookup(const RenderContext& ctx, const std::string& name) {
  if (name == "instruction") return ctx.instruction;
  if (name == "output") return ctx.output;
  if (name == "output_a") return ctx.output_a;
  if (name == "output_b") return ctx.output_b;
  if (name == "explanation_a") return ctx.explanation_a;
  if (name == "explanation_b") return ctx.explanation_b;
  if (name == "metrics") return ctx.metrics;
  if (name == "rules") return ctx.rules ? *ctx.rules : rules_text();
  return std::nullopt;
}

// Finds the placeholder name starting at body[i] (which is '{'), if any.
std::optional<std::string> placeholder_at(const std::string& body, size_t i) {
  for (const auto& name : placeholder_names()) {
    size_t len = name.size() + 2;
    if (i + len <= body.size() && body[i + len - 1] == '}' &&
        body.compare(i + 1, name.size(), name) == 0)
      return name;
  }
  return std::nullopt;
}

std::string key_id(const TemplateKey& key) {
  return to_string(key.family) + "/" + metajudge::to_string(key.strategy) + "/" +
         to_string(key.phase);
}

std::string compute_version(const std::string& label, const std::string& body) {
  std::vector<std::string_view> fields = {body};
  if (body.find("{rules}") != std::string::npos) fields.push_back(rules_text());
  return label + "-" + sha256_hex_fields(fields).substr(0, 12);
}

}  // namespace

std::string to_string(PromptFamily family) {
  for (const auto& [value, name] : kFamilyNames)
    if (value == family) return name;
  throw ConfigError("unknown prompt family", "bad_enum");
}

PromptFamily family_from_string(const std::string& name) {
  for (const auto& [value, text] : kFamilyNames)
    if (name == text) return value;
  throw ConfigError("unknown prompt family '" + name + "'", "bad_enum");
}

std::string to_string(Phase phase) {
  for (const auto& [value, name] : kPhaseNames)
    if (value == phase) return name;
  throw ConfigError("unknown phase", "bad_enum");
}

Phase phase_from_string(const std::string& name) {
  for (const auto& [value, text] : kPhaseNames)
    if (name == text) return value;
  throw ConfigError("unknown phase '" + name + "'", "bad_enum");
}

std::vector<Phase> phase_sequence(StrategyKind strategy) {
  using enum Phase;
  switch (strategy) {
    case StrategyKind::Pointwise:
      return {SingleJudge};
    case StrategyKind::Pairwise:
    case StrategyKind::PairwiseCoT:
      return {PairJudge};
    case StrategyKind::PRePair:
      return {PointReason, FinalJudge};
    case StrategyKind::PRePairStar:
      return {PairReason, FinalJudge};
    case StrategyKind::PairwiseSGM:
      return {MetricGen, PairJudge};
    case StrategyKind::PRePairSGM:
      return {MetricGen, PointReason, FinalJudge};
  }
  throw ConfigError("unknown strategy", "bad_enum");
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    if (auto name = placeholder_at(body, i)) {
      if (std::find(out.begin(), out.end(), *name) == out.end()) out.push_back(*name);
      i += name->size() + 1;
    }
  }
  return out;
}

std::string render(const PromptTemplate& tpl, const RenderContext& ctx) {
  std::string out;
  out.reserve(tpl.body.size() + 1024);
  for (size_t i = 0; i < tpl.body.size();) {
    if (tpl.body[i] == '{') {
      if (auto name = placeholder_at(tpl.body, i)) {
        auto value = lookup(ctx, *name);
        if (!value)
          throw ConfigError("template " + tpl.id + " requires {" + *name + "}",
                            "unbound_placeholder");
        out += *value;
        i += name->size() + 2;
        continue;
      }
    }
    out += tpl.body[i];
    ++i;
  }
  return out;
}

const std::string& rules_text() {
  static const std::string rules =
      "Evaluation rules:\n"
      "- Prioritize whether each output precisely and faithfully executes the "
      "instruction; only then weigh helpfulness, accuracy, depth, and tone.\n"
      "- An output that adds content the instruction did not ask for, or omits "
      "content it did ask for, does not precisely execute the instruction.\n"
      "- Stay objective: the order in which the outputs are presented, their "
      "length, and their style must not sway the judgment on their own.\n"
      "- Superficial polish never outweighs actually satisfying the request.";
  return rules;
}

void PromptRegistry::register_template(const TemplateKey& key, std::string label,
                                       std::string body) {
  PromptTemplate tpl;
  tpl.id = key_id(key);
  tpl.label = std::move(label);
  tpl.version = compute_version(tpl.label, body);
  tpl.body = std::move(body);
  templates_[key] = std::move(tpl);
}

void PromptRegistry::register_alias(const TemplateKey& key, const TemplateKey& target) {
  auto it = templates_.find(target);
  if (it == templates_.end())
    throw ConfigError("alias target " + key_id(target) + " not registered",
                      "missing_template");
  templates_[key] = it->second;
}

const PromptTemplate& PromptRegistry::get(const TemplateKey& key) const {
  auto it = templates_.find(key);
  if (it == templates_.end())
    throw ConfigError("no template registered for " + key_id(key), "missing_template");
  return it->second;
}

const PromptTemplate& PromptRegistry::get(PromptFamily family, StrategyKind strategy,
                                          Phase phase) const {
  return get(TemplateKey{family, strategy, phase});
}

bool PromptRegistry::contains(const TemplateKey& key) const {
  return templates_.find(key) != templates_.end();
}

void PromptRegistry::verify_coverage() const {
  for (const auto& [family, family_name] : kFamilyNames) {
    for (StrategyKind strategy : kAllStrategies) {
      for (Phase phase : phase_sequence(strategy)) {
        TemplateKey key{family, strategy, phase};
        if (!contains(key))
          throw ConfigError("no template registered for " + key_id(key), "missing_template");
      }
    }
  }
}

std::vector<TemplateKey> PromptRegistry::keys() const {
  std::vector<TemplateKey> out;
  out.reserve(templates_.size());
  for (const auto& [key, tpl] : templates_) out.push_back(key);
  return out;
}

std::vector<const PromptTemplate*> PromptRegistry::distinct_templates() const {
  std::vector<const PromptTemplate*> out;
  for (const auto& [key, tpl] : templates_) {
    bool seen = std::any_of(out.begin(), out.end(),
                            [&](const PromptTemplate* t) { return t->id == tpl.id; });
    if (!seen) out.push_back(&tpl);
  }
  std::sort(out.begin(), out.end(),
            [](const PromptTemplate* x, const PromptTemplate* y) { return x->id < y->id; });
  return out;
}

namespace {

// Aliased slots: these strategies reuse another strategy's template so that
// identity-derived artifacts (notably reasoning-cache keys) are shared.
std::vector<std::pair<TemplateKey, TemplateKey>> standard_aliases() {
  std::vector<std::pair<TemplateKey, TemplateKey>> out;
  for (const auto& [family, name] : kFamilyNames) {
    out.push_back({{family, StrategyKind::PRePairStar, Phase::FinalJudge},
                   {family, StrategyKind::PRePair, Phase::FinalJudge}});
    out.push_back({{family, StrategyKind::PRePairSGM, Phase::MetricGen},
                   {family, StrategyKind::PairwiseSGM, Phase::MetricGen}});
  }
  return out;
}

TemplateKey key_from_id(const std::string& id) {
  size_t first = id.find('/');
  size_t second = id.find('/', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw ConfigError("template id '" + id + "' is not family/strategy/phase",
                      "bad_template_id");
  auto strategy = strategy_from_string(id.substr(first + 1, second - first - 1));
  if (!strategy)
    throw ConfigError("template id '" + id + "' names an unknown strategy",
                      "bad_template_id");
  return TemplateKey{family_from_string(id.substr(0, first)), *strategy,
                     phase_from_string(id.substr(second + 1))};
}

}  // namespace

PromptRegistry PromptRegistry::from_assets_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw ConfigError("prompt assets directory not found: " + dir.string(),
                      "missing_assets");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  PromptRegistry registry;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string(), "missing_assets");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();

    const std::string fence = "---\n";
    if (content.rfind(fence, 0) != 0)
      throw ConfigError(path.string() + ": missing front-matter", "bad_template_file");
    size_t end = content.find("\n" + fence, fence.size() - 1);
    if (end == std::string::npos)
      throw ConfigError(path.string() + ": unterminated front-matter", "bad_template_file");
    std::string header = content.substr(fence.size(), end - fence.size() + 1);
    std::string body = content.substr(end + 1 + fence.size());

    std::string id, label;
    std::istringstream lines(header);
    for (std::string line; std::getline(lines, line);) {
      size_t colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string field = line.substr(0, colon);
      std::string value = line.substr(colon + 1);
      size_t start = value.find_first_not_of(' ');
      value = start == std::string::npos ? "" : value.substr(start);
      if (field == "id") id = value;
      if (field == "label") label = value;
    }
    if (id.empty() || label.empty())
      throw ConfigError(path.string() + ": front-matter needs id and label",
                        "bad_template_file");
    registry.register_template(key_from_id(id), label, body);
  }

  for (const auto& [key, target] : standard_aliases())
    if (registry.contains(target)) registry.register_alias(key, target);
  return registry;
}

void PromptRegistry::export_to(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const PromptTemplate* tpl : distinct_templates()) {
    std::string name = tpl->id;
    std::replace(name.begin(), name.end(), '/', '.');
    fs::path path = dir / (name + ".txt");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string(), "bad_template_file");
    out << "---\n"
        << "id: " << tpl->id << "\n"
        << "label: " << tpl->label << "\n"
        << "---\n"
        << tpl->body;
  }
}

namespace detail {
void install_builtin_templates(PromptRegistry& registry);
}

const PromptRegistry& PromptRegistry::builtin() {
  static const PromptRegistry registry = [] {
    PromptRegistry r;
    detail::install_builtin_templates(r);
    for (const auto& [key, target] : standard_aliases()) r.register_alias(key, target);
    r.verify_coverage();
    return r;
  }();
  return registry;
}

}  // namespace metajudge::prompts
