#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metajudge/errors.hpp"

namespace metajudge {

// ---------------------------------------------------------------------------
// Labels and verdicts
// ---------------------------------------------------------------------------

enum class PreferenceLabel { A, B, Tie };

/// A verdict can also be Inconclusive: no legal verdict could be extracted,
/// or swapped presentation orders disagreed. Never silently coerced to a pick.
enum class Choice { A, B, Tie, Inconclusive };

PreferenceLabel flip(PreferenceLabel label);
Choice flip(Choice choice);

const char* to_string(PreferenceLabel label);
const char* to_string(Choice choice);
std::optional<PreferenceLabel> label_from_string(const std::string& text);
std::optional<Choice> choice_from_string(const std::string& text);

/// Subset key used for samples that carry no subset tag.
inline constexpr const char* kNoSubset = "(none)";

// ---------------------------------------------------------------------------
// Datasets and samples
// ---------------------------------------------------------------------------

struct DatasetKind {
  std::string name;
  bool tie_allowed = false;
  /// Inject the general evaluation rules into every prompt (adversarial
  /// instruction-following benchmarks use this; normal benchmarks do not).
  bool rules_injection = false;
};

struct EvalSample {
  std::string id;
  std::string instruction;
  std::string output_a;
  std::string output_b;
  PreferenceLabel label = PreferenceLabel::A;
  std::optional<std::string> subset;
  DatasetKind dataset;

  /// Subset key for reporting; samples without a tag group under "(none)".
  std::string subset_key() const { return subset.value_or(kNoSubset); }

  /// Throws DataError if any invariant is violated (empty fields, tie label
  /// in a no-tie dataset). Id uniqueness is checked at ingest.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

enum class StrategyKind {
  Pointwise,
  Pairwise,
  PairwiseCoT,
  PRePair,
  PRePairStar,
  PairwiseSGM,
  PRePairSGM,
};

inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::Pointwise,   StrategyKind::Pairwise,    StrategyKind::PairwiseCoT,
    StrategyKind::PRePair,     StrategyKind::PRePairStar, StrategyKind::PairwiseSGM,
    StrategyKind::PRePairSGM,
};

const char* to_string(StrategyKind kind);
std::optional<StrategyKind> strategy_from_string(const std::string& text);

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct Verdict {
  Choice choice = Choice::Inconclusive;
  /// Present iff produced by a score-based (pointwise family) strategy.
  std::optional<double> score_a;
  std::optional<double> score_b;
  /// Cause of an Inconclusive outcome, or empty.
  std::string note;
  /// Indices into the owning JudgedSample's transcript list.
  std::vector<int> transcripts;
};

/// Agreement credit between a verdict and the human label: 1 for a match,
/// 0 for a definite mismatch, `inconclusive_credit` when no verdict was
/// reached.
double agrees(const Verdict& verdict, PreferenceLabel label,
              double inconclusive_credit = 0.0);

}  // namespace metajudge
