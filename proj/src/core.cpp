#include "metajudge/core.hpp"

namespace metajudge {

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config:
      return 2;
    case ErrorCategory::Data:
      return 3;
    case ErrorCategory::Transport:
      return 4;
    default:
      return 1;
  }
}

const char* category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config:
      return "config";
    case ErrorCategory::Data:
      return "data";
    case ErrorCategory::Transport:
      return "transport";
    case ErrorCategory::Parse:
      return "parse";
    case ErrorCategory::Store:
      return "store";
    default:
      return "internal";
  }
}

PreferenceLabel flip(PreferenceLabel label) {
  switch (label) {
    case PreferenceLabel::A:
      return PreferenceLabel::B;
    case PreferenceLabel::B:
      return PreferenceLabel::A;
    default:
      return PreferenceLabel::Tie;
  }
}

Choice flip(Choice choice) {
  switch (choice) {
    case Choice::A:
      return Choice::B;
    case Choice::B:
      return Choice::A;
    default:
      return choice;  // Tie and Inconclusive are fixed points
  }
}

const char* to_string(PreferenceLabel label) {
  switch (label) {
    case PreferenceLabel::A:
      return "A";
    case PreferenceLabel::B:
      return "B";
    default:
      return "Tie";
  }
}

const char* to_string(Choice choice) {
  switch (choice) {
    case Choice::A:
      return "A";
    case Choice::B:
      return "B";
    case Choice::Tie:
      return "Tie";
    default:
      return "Inconclusive";
  }
}

std::optional<PreferenceLabel> label_from_string(const std::string& text) {
  if (text == "A") return PreferenceLabel::A;
  if (text == "B") return PreferenceLabel::B;
  if (text == "Tie") return PreferenceLabel::Tie;
  return std::nullopt;
}

std::optional<Choice> choice_from_string(const std::string& text) {
  if (text == "A") return Choice::A;
  if (text == "B") return Choice::B;
  if (text == "Tie") return Choice::Tie;
  if (text == "Inconclusive") return Choice::Inconclusive;
  return std::nullopt;
}

void EvalSample::validate() const {
  if (id.empty()) throw DataError("malformed_record", "sample has empty id");
  if (instruction.empty())
    throw DataError("malformed_record", "sample '" + id + "' has empty instruction");
  if (output_a.empty())
    throw DataError("malformed_record", "sample '" + id + "' has empty output_a");
  if (output_b.empty())
    throw DataError("malformed_record", "sample '" + id + "' has empty output_b");
  if (!dataset.tie_allowed && label == PreferenceLabel::Tie)
    throw DataError("illegal_tie", "sample '" + id + "' carries a tie label but dataset '" +
                                       dataset.name + "' does not allow ties");
}

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Pointwise:
      return "pointwise";
    case StrategyKind::Pairwise:
      return "pairwise";
    case StrategyKind::PairwiseCoT:
      return "pairwise-cot";
    case StrategyKind::PRePair:
      return "prepair";
    case StrategyKind::PRePairStar:
      return "prepair-star";
    case StrategyKind::PairwiseSGM:
      return "pairwise-sgm";
    default:
      return "prepair-sgm";
  }
}

std::optional<StrategyKind> strategy_from_string(const std::string& text) {
  for (StrategyKind kind : kAllStrategies) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

double agrees(const Verdict& verdict, PreferenceLabel label, double inconclusive_credit) {
  if (verdict.choice == Choice::Inconclusive) return inconclusive_credit;
  switch (verdict.choice) {
    case Choice::A:
      return label == PreferenceLabel::A ? 1.0 : 0.0;
    case Choice::B:
      return label == PreferenceLabel::B ? 1.0 : 0.0;
    default:
      return label == PreferenceLabel::Tie ? 1.0 : 0.0;
  }
}

}  // namespace metajudge
