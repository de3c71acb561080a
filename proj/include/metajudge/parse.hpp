#pragma once

#include <map>
#include <optional>
#include <vector>

#include "metajudge/backend.hpp"
#include "metajudge/core.hpp"

namespace metajudge::parse {

/// Normalized probability mass over Likert scores 1..5.
class ScoreDistribution {
 public:
  /// Validates: nonnegative mass, support within 1..5, total within 1e-9
  /// of 1. Throws ParseError("empty_support") / DataError otherwise.
  static ScoreDistribution make(std::map<int, double> mass);

  const std::map<int, double>& mass() const { return mass_; }
  double probability_of(int score) const;

 private:
  explicit ScoreDistribution(std::map<int, double> mass) : mass_(std::move(mass)) {}
  std::map<int, double> mass_;
};

/// Extracts a pairwise choice from free-form judge text. Canonical
/// "Decision:" lines take precedence; otherwise the last recognized verdict
/// phrase wins. Throws ParseError: parse_empty, parse_ambiguous, illegal_tie.
Choice parse_pairwise_verdict(const std::string& text, bool tie_allowed);

/// Extracts a 1-5 Likert score: the first standalone digit following a
/// rating marker ("Rating:", "Score:"), else the last standalone 1-5 digit.
/// Digits inside larger numbers, fractions, and "out of 5" denominators do
/// not count. Throws ParseError: parse_empty, out_of_range.
int parse_likert_score(const std::string& text);

/// First generated token position whose (whitespace-trimmed) token is a
/// digit 1..5, or nullopt.
std::optional<size_t> find_score_anchor(const std::vector<backend::TokenPosition>& tokens);

/// Distribution over the 1-5 candidates at the anchor position: collect,
/// exponentiate, renormalize over the observed set. Throws ParseError:
/// empty_support.
ScoreDistribution extract_score_distribution(const std::vector<backend::TokenPosition>& tokens,
                                             size_t anchor_position);

/// Convenience: locate the anchor, then extract. Throws ParseError:
/// no_score_token, empty_support.
ScoreDistribution extract_score_distribution(const std::vector<backend::TokenPosition>& tokens);

}  // namespace metajudge::parse
