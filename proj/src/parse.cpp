#include "metajudge/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

namespace metajudge::parse {

// ---------------------------------------------------------------------------
// ScoreDistribution
// ---------------------------------------------------------------------------

ScoreDistribution ScoreDistribution::make(std::map<int, double> mass) {
  if (mass.empty()) throw ParseError("empty_support", "score distribution has empty support");
  double total = 0.0;
  for (const auto& [score, p] : mass) {
    if (score < 1 || score > 5)
      throw DataError("score_distribution", "score " + std::to_string(score) + " outside 1..5");
    if (p < 0.0)
      throw DataError("score_distribution", "negative probability mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw DataError("score_distribution", "probability mass does not sum to 1");
  return ScoreDistribution(std::move(mass));
}

double ScoreDistribution::probability_of(int score) const {
  auto it = mass_.find(score);
  return it == mass_.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Pairwise verdict extraction
// ---------------------------------------------------------------------------

namespace {

std::string to_lower(const std::string& text) {
  std::string out = text;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Mention {
  size_t position;
  Choice choice;
};

// Verdict markers inside the remainder of a canonical "Decision:" line.
// Returns the set of distinct choices mentioned.
std::vector<Choice> scan_decision_remainder(const std::string& lower_rest,
                                            const std::string& original_rest) {
  std::vector<Choice> found;
  auto note = [&](Choice c) {
    if (std::find(found.begin(), found.end(), c) == found.end()) found.push_back(c);
  };

  static const std::regex output_letter(R"(output\s*\(?\s*([ab])\s*\)?(?![a-z0-9]))");
  static const std::regex paren_letter(R"(\(\s*([ab])\s*\))");
  for (auto it = std::sregex_iterator(lower_rest.begin(), lower_rest.end(), output_letter);
       it != std::sregex_iterator(); ++it)
    note((*it)[1].str() == "a" ? Choice::A : Choice::B);
  for (auto it = std::sregex_iterator(lower_rest.begin(), lower_rest.end(), paren_letter);
       it != std::sregex_iterator(); ++it)
    note((*it)[1].str() == "a" ? Choice::A : Choice::B);

  static const std::regex tie_word(R"(\btie\b)");
  if (std::regex_search(lower_rest, tie_word)) note(Choice::Tie);

  if (found.empty()) {
    // Bare letter at the start of the remainder. Lowercase "a"/"b" counts
    // only when it is the entire remainder, so articles ("a tie", "a close
    // call") never read as verdicts.
    static const std::regex bare_full(R"(^\s*\*{0,2}\(?([ab])\)?\*{0,2}\s*[.!]?\s*$)");
    std::smatch m;
    if (std::regex_match(lower_rest, m, bare_full)) {
      note(m[1].str() == "a" ? Choice::A : Choice::B);
    } else {
      static const std::regex bare_upper(R"(^\s*\*{0,2}\(?([AB])\)?\b)");
      if (std::regex_search(original_rest, m, bare_upper))
        note(m[1].str() == "A" ? Choice::A : Choice::B);
    }
  }
  return found;
}

// Locates the canonical marker on one line; returns the offset just past it,
// or npos.
size_t decision_marker_end(const std::string& lower_line) {
  static const std::regex marker(R"(\bdecision\b\s*(?:is)?\s*[:\-]?\s*)");
  std::smatch m;
  if (!std::regex_search(lower_line, m, marker)) return std::string::npos;
  return static_cast<size_t>(m.position(0) + m.length(0));
}

}  // namespace

Choice parse_pairwise_verdict(const std::string& text, bool tie_allowed) {
  std::string lower = to_lower(text);

  // Pass 1: canonical decision lines, last cleanly-parsed one wins.
  std::optional<Choice> canonical;
  bool saw_ambiguous_canonical = false;
  size_t line_start = 0;
  while (line_start <= lower.size()) {
    size_t line_end = lower.find('\n', line_start);
    if (line_end == std::string::npos) line_end = lower.size();
    std::string lower_line = lower.substr(line_start, line_end - line_start);
    size_t rest_at = decision_marker_end(lower_line);
    if (rest_at != std::string::npos) {
      std::string lower_rest = lower_line.substr(rest_at);
      std::string original_rest = text.substr(line_start + rest_at, line_end - line_start - rest_at);
      auto found = scan_decision_remainder(lower_rest, original_rest);
      if (found.size() == 1)
        canonical = found[0];
      else if (found.size() > 1)
        saw_ambiguous_canonical = true;
    }
    line_start = line_end + 1;
  }

  std::optional<Choice> result = canonical;

  if (!result) {
    // Pass 2: last recognized verdict phrase anywhere in the text.
    std::vector<Mention> mentions;
    auto collect = [&](const std::regex& re, bool letter_group) {
      for (auto it = std::sregex_iterator(lower.begin(), lower.end(), re);
           it != std::sregex_iterator(); ++it) {
        Choice c = Choice::Tie;
        if (letter_group) c = (*it)[1].str() == "a" ? Choice::A : Choice::B;
        mentions.push_back({static_cast<size_t>(it->position(0)), c});
      }
    };
    static const std::regex is_better(
        R"(output\s*\(?\s*([ab])\s*\)?\s+(?:is|was|seems|appears|remains|sounds)\s+(?:the\s+)?(?:[a-z]+\s+){0,2}(?:better|superior|stronger|preferable|preferred))");
    static const std::regex chosen(
        R"((?:prefer|choose|chose|select|selected|pick|picked)\s+output\s*\(?\s*([ab])\s*\)?)");
    static const std::regex better_is(
        R"(better\s+(?:output|response|answer)\s+is\s+(?:output\s*)?\(?\s*([ab])\s*\)?)");
    static const std::regex tie_word(R"(\btie\b)");
    collect(is_better, true);
    collect(chosen, true);
    collect(better_is, true);
    collect(tie_word, false);

    if (!mentions.empty()) {
      auto last = std::max_element(mentions.begin(), mentions.end(),
                                   [](const Mention& x, const Mention& y) {
                                     return x.position < y.position;
                                   });
      bool conflict = std::any_of(mentions.begin(), mentions.end(), [&](const Mention& m) {
        return m.position == last->position && m.choice != last->choice;
      });
      if (conflict)
        throw ParseError("parse_ambiguous", "conflicting verdict phrases at the same position");
      result = last->choice;
    }
  }

  if (!result) {
    if (saw_ambiguous_canonical)
      throw ParseError("parse_ambiguous", "decision line mentions multiple verdicts");
    throw ParseError("parse_empty", "no verdict phrase found");
  }
  if (*result == Choice::Tie && !tie_allowed)
    throw ParseError("illegal_tie", "tie verdict parsed but ties are not allowed");
  return *result;
}

// ---------------------------------------------------------------------------
// Likert score extraction
// ---------------------------------------------------------------------------

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// A digit neither embedded in a larger number ("45", "4.5", "3/5", "v2")
// nor serving as a scale denominator ("out of 5").
bool standalone_digit_at(const std::string& lower, size_t i) {
  if (!is_digit(lower[i])) return false;
  if (i > 0) {
    char prev = lower[i - 1];
    if (is_digit(prev) || is_alpha(prev)) return false;
    if ((prev == '.' || prev == ',') && i >= 2 && is_digit(lower[i - 2])) return false;
    if (prev == '/') return false;
  }
  if (i + 1 < lower.size()) {
    char next = lower[i + 1];
    if (is_digit(next) || is_alpha(next)) return false;
    if ((next == '.' || next == ',') && i + 2 < lower.size() && is_digit(lower[i + 2]))
      return false;
    if (next == '/') return false;
  }
  // Denominator check: "... out of 5".
  size_t j = i;
  while (j > 0 && lower[j - 1] == ' ') --j;
  if (j >= 6 && lower.compare(j - 6, 6, "out of") == 0) return false;
  return true;
}

}  // namespace

int parse_likert_score(const std::string& text) {
  std::string lower = to_lower(text);

  static const std::regex marker(R"(\b(?:rating|score)\b\s*(?:is)?\s*[:\-]?\s*)");
  for (auto it = std::sregex_iterator(lower.begin(), lower.end(), marker);
       it != std::sregex_iterator(); ++it) {
    size_t from = static_cast<size_t>(it->position(0) + it->length(0));
    for (size_t i = from; i < lower.size(); ++i) {
      if (!standalone_digit_at(lower, i)) continue;
      int value = lower[i] - '0';
      if (value >= 1 && value <= 5) return value;
      throw ParseError("out_of_range",
                       "score " + std::to_string(value) + " outside the 1-5 scale");
    }
    // Marker with no digit after it: fall through to the next marker or the
    // global fallback.
  }

  std::optional<int> last_in_range;
  bool any_standalone = false;
  for (size_t i = 0; i < lower.size(); ++i) {
    if (!standalone_digit_at(lower, i)) continue;
    any_standalone = true;
    int value = lower[i] - '0';
    if (value >= 1 && value <= 5) last_in_range = value;
  }
  if (last_in_range) return *last_in_range;
  if (any_standalone)
    throw ParseError("out_of_range", "only digits outside the 1-5 scale found");
  throw ParseError("parse_empty", "no score digit found");
}

// ---------------------------------------------------------------------------
// Token-probability distributions
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<int> score_token_value(const std::string& token) {
  std::string t = trim(token);
  if (t.size() != 1 || t[0] < '1' || t[0] > '5') return std::nullopt;
  return t[0] - '0';
}

}  // namespace

std::optional<size_t> find_score_anchor(const std::vector<backend::TokenPosition>& tokens) {
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].candidates.empty()) continue;
    if (score_token_value(tokens[i].candidates.front().token)) return i;
  }
  return std::nullopt;
}

ScoreDistribution extract_score_distribution(const std::vector<backend::TokenPosition>& tokens,
                                             size_t anchor_position) {
  if (anchor_position >= tokens.size())
    throw ParseError("no_score_token", "anchor position out of range");
  std::map<int, double> mass;
  for (const auto& cand : tokens[anchor_position].candidates) {
    if (auto value = score_token_value(cand.token))
      mass[*value] += std::exp(cand.logprob);
  }
  if (mass.empty())
    throw ParseError("empty_support", "no 1-5 candidates at the score token position");
  double total = 0.0;
  for (const auto& [score, p] : mass) total += p;
  for (auto& [score, p] : mass) p /= total;
  return ScoreDistribution::make(std::move(mass));
}

ScoreDistribution extract_score_distribution(const std::vector<backend::TokenPosition>& tokens) {
  auto anchor = find_score_anchor(tokens);
  if (!anchor)
    throw ParseError("no_score_token", "no generated token matches a 1-5 digit");
  return extract_score_distribution(tokens, *anchor);
}

}  // namespace metajudge::parse
