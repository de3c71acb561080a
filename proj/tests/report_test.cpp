#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "metajudge/errors.hpp"
#include "metajudge/report.hpp"
#include "metajudge/strategies.hpp"

namespace {

using namespace metajudge;
using report::EvalReport;
using report::ReportMeta;
using strategies::JudgedSample;

JudgedSample make_judged(const std::string& id, const std::string& subset,
                         PreferenceLabel label, Choice choice, double credit) {
  JudgedSample judged;
  judged.sample_id = id;
  judged.subset = subset;
  judged.label = label;
  judged.verdict.choice = choice;
  judged.credit = credit;
  judged.strategy = "pairwise";
  judged.templates = "two_way/pairwise/pair_judge@pair-000000000000";
  return judged;
}

// `correct` samples earn full credit, the rest none.
std::vector<JudgedSample> subset_block(const std::string& subset, std::size_t correct,
                                       std::size_t total, std::size_t* serial) {
  std::vector<JudgedSample> judged;
  for (std::size_t i = 0; i < total; ++i) {
    bool hit = i < correct;
    judged.push_back(make_judged("R" + std::to_string(++*serial), subset,
                                 PreferenceLabel::A, hit ? Choice::A : Choice::B,
                                 hit ? 1.0 : 0.0));
  }
  return judged;
}

ReportMeta meta_for(const std::string& strategy) {
  ReportMeta meta;
  meta.dataset = "synthbar";
  meta.backend = "scripted-judge";
  meta.model = "scripted-judge";
  meta.strategy = strategy;
  return meta;
}

// ---------------------------------------------------------------------------
// Aggregation arithmetic
// ---------------------------------------------------------------------------

TEST(BuildReport, AggregatesCreditPerSubsetAndOverall) {
  std::vector<JudgedSample> judged{
      make_judged("a1", "easy", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("a2", "easy", PreferenceLabel::B, Choice::A, 0.0),
      make_judged("a3", "hard", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("a4", "(none)", PreferenceLabel::A, Choice::Inconclusive, 0.5),
  };
  EvalReport rep = report::build_report(judged, meta_for("pairwise"));

  EXPECT_EQ(rep.sample_count, 4u);
  EXPECT_DOUBLE_EQ(rep.credit, 2.5);
  EXPECT_DOUBLE_EQ(rep.accuracy_pct, 62.5);

  ASSERT_EQ(rep.subsets.size(), 3u);
  // Sorted by subset key: "(none)" < "easy" < "hard".
  EXPECT_EQ(rep.subsets[0].subset, "(none)");
  EXPECT_EQ(rep.subsets[1].subset, "easy");
  EXPECT_EQ(rep.subsets[2].subset, "hard");
  EXPECT_EQ(rep.subsets[1].count, 2u);
  EXPECT_DOUBLE_EQ(rep.subsets[1].credit, 1.0);
  EXPECT_DOUBLE_EQ(rep.subsets[1].accuracy_pct, 50.0);
  EXPECT_DOUBLE_EQ(rep.subsets[0].accuracy_pct, 50.0);
  EXPECT_DOUBLE_EQ(rep.subsets[2].accuracy_pct, 100.0);

  EXPECT_EQ(rep.verdicts.a, 3u);
  EXPECT_EQ(rep.verdicts.b, 0u);
  EXPECT_EQ(rep.verdicts.tie, 0u);
  EXPECT_EQ(rep.verdicts.inconclusive, 1u);
}

// Benchmark-shaped fixture: four subsets sized 46/92/47/134. The overall
// accuracy must be the sample-weighted (micro) average of the subset hits,
// not the mean of the four subset percentages.
TEST(BuildReport, ReproducesTheFourSubsetBenchmarkArithmetic) {
  std::size_t serial = 0;
  std::vector<JudgedSample> judged;
  struct Block {
    const char* subset;
    std::size_t correct;
    std::size_t total;
    double expected_pct;
  };
  const Block blocks[] = {
      {"knowledge", 24, 46, 52.17},
      {"common_sense", 59, 92, 64.13},
      {"symbolic", 23, 47, 48.94},
      {"coding", 67, 134, 50.00},
  };
  for (const auto& block : blocks) {
    auto rows = subset_block(block.subset, block.correct, block.total, &serial);
    judged.insert(judged.end(), rows.begin(), rows.end());
  }

  EvalReport rep = report::build_report(judged, meta_for("prepair"));
  EXPECT_EQ(rep.sample_count, 319u);
  EXPECT_DOUBLE_EQ(rep.credit, 173.0);
  EXPECT_NEAR(rep.accuracy_pct, 54.23, 0.01);

  ASSERT_EQ(rep.subsets.size(), 4u);
  for (const auto& block : blocks) {
    auto it = std::find_if(rep.subsets.begin(), rep.subsets.end(),
                           [&](const auto& s) { return s.subset == block.subset; });
    ASSERT_NE(it, rep.subsets.end()) << block.subset;
    EXPECT_EQ(it->count, block.total);
    EXPECT_NEAR(it->accuracy_pct, block.expected_pct, 0.01) << block.subset;
  }

  // The mean of the subset percentages (53.81) differs from the micro
  // average; conflating the two is the classic aggregation mistake.
  double subset_mean = (52.17 + 64.13 + 48.94 + 50.00) / 4.0;
  EXPECT_GT(std::abs(rep.accuracy_pct - subset_mean), 0.3);
}

TEST(BuildReport, SecondBenchmarkRowMatchesTheWeightedAverage) {
  std::size_t serial = 0;
  std::vector<JudgedSample> judged;
  const std::tuple<const char*, std::size_t, std::size_t> blocks[] = {
      {"knowledge", 19, 46},
      {"common_sense", 31, 92},
      {"symbolic", 19, 47},
      {"coding", 46, 134},
  };
  for (const auto& [subset, correct, total] : blocks) {
    auto rows = subset_block(subset, correct, total, &serial);
    judged.insert(judged.end(), rows.begin(), rows.end());
  }

  EvalReport rep = report::build_report(judged, meta_for("pairwise"));
  EXPECT_EQ(rep.sample_count, 319u);
  EXPECT_DOUBLE_EQ(rep.credit, 115.0);
  EXPECT_NEAR(rep.accuracy_pct, 36.05, 0.01);
  EXPECT_NEAR(rep.subsets.front().accuracy_pct, 34.33, 0.01);  // coding, 46/134
}

TEST(BuildReport, SubsetCreditsAlwaysSumToTheTotal) {
  std::vector<JudgedSample> judged{
      make_judged("x1", "p", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("x2", "q", PreferenceLabel::A, Choice::Inconclusive, 0.5),
      make_judged("x3", "q", PreferenceLabel::B, Choice::Tie, 0.0),
      make_judged("x4", "r", PreferenceLabel::B, Choice::B, 1.0),
  };
  EvalReport rep = report::build_report(judged, meta_for("pointwise"));

  double subset_credit = 0.0;
  std::size_t subset_count = 0;
  for (const auto& stat : rep.subsets) {
    subset_credit += stat.credit;
    subset_count += stat.count;
  }
  EXPECT_DOUBLE_EQ(subset_credit, rep.credit);
  EXPECT_EQ(subset_count, rep.sample_count);
  EXPECT_EQ(rep.verdicts.a + rep.verdicts.b + rep.verdicts.tie + rep.verdicts.inconclusive,
            rep.sample_count);
}

TEST(BuildReport, EmptyInputThrows) {
  EXPECT_THROW(
      {
        try {
          report::build_report({}, meta_for("pairwise"));
        } catch (const DataError& e) {
          EXPECT_EQ(e.code(), "empty_input");
          throw;
        }
      },
      DataError);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

TEST(ReportJson, RoundTripPreservesEveryField) {
  std::vector<JudgedSample> judged{
      make_judged("a1", "easy", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("a2", "hard", PreferenceLabel::B, Choice::Inconclusive, 0.5),
  };
  ReportMeta meta = meta_for("prepair");
  meta.temperature = 0.7;
  meta.order_swap = true;
  meta.inconclusive_credit = 0.5;
  EvalReport rep = report::build_report(judged, meta);

  nlohmann::json doc = report::report_to_json(rep);
  EvalReport back = report::report_from_json(doc);

  EXPECT_EQ(back.meta.dataset, rep.meta.dataset);
  EXPECT_EQ(back.meta.backend, rep.meta.backend);
  EXPECT_EQ(back.meta.model, rep.meta.model);
  EXPECT_EQ(back.meta.strategy, rep.meta.strategy);
  EXPECT_DOUBLE_EQ(back.meta.temperature, rep.meta.temperature);
  EXPECT_EQ(back.meta.order_swap, rep.meta.order_swap);
  EXPECT_DOUBLE_EQ(back.meta.inconclusive_credit, rep.meta.inconclusive_credit);
  EXPECT_EQ(back.sample_count, rep.sample_count);
  EXPECT_DOUBLE_EQ(back.credit, rep.credit);
  EXPECT_DOUBLE_EQ(back.accuracy_pct, rep.accuracy_pct);
  EXPECT_EQ(back.verdicts.a, rep.verdicts.a);
  EXPECT_EQ(back.verdicts.inconclusive, rep.verdicts.inconclusive);
  ASSERT_EQ(back.subsets.size(), rep.subsets.size());
  for (std::size_t i = 0; i < back.subsets.size(); ++i) {
    EXPECT_EQ(back.subsets[i].subset, rep.subsets[i].subset);
    EXPECT_EQ(back.subsets[i].count, rep.subsets[i].count);
    EXPECT_DOUBLE_EQ(back.subsets[i].credit, rep.subsets[i].credit);
    EXPECT_DOUBLE_EQ(back.subsets[i].accuracy_pct, rep.subsets[i].accuracy_pct);
  }

  // Rendering is deterministic: same inputs, same bytes.
  EXPECT_EQ(report::report_to_json(back).dump(2), doc.dump(2));
}

TEST(ReportJson, MissingFieldsAreRejected) {
  nlohmann::json doc{{"dataset", "synthbar"}};
  EXPECT_THROW(report::report_from_json(doc), DataError);
}

TEST(ReportText, RendersHeaderTableAndCensus) {
  std::vector<JudgedSample> judged{
      make_judged("a1", "easy", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("a2", "easy", PreferenceLabel::A, Choice::B, 0.0),
      make_judged("a3", "hard", PreferenceLabel::B, Choice::Tie, 0.0),
  };
  EvalReport rep = report::build_report(judged, meta_for("pairwise"));
  std::string text = report::report_to_text(rep);

  EXPECT_NE(text.find("dataset: synthbar   strategy: pairwise   backend: scripted-judge "
                      "(scripted-judge)"),
            std::string::npos);
  EXPECT_NE(text.find("order_swap: off"), std::string::npos);
  EXPECT_NE(text.find("easy"), std::string::npos);
  EXPECT_NE(text.find("hard"), std::string::npos);
  EXPECT_NE(text.find("TOTAL"), std::string::npos);
  EXPECT_NE(text.find("verdicts: A=1 B=1 Tie=1 Inconclusive=0"), std::string::npos);
  EXPECT_NE(text.find("33.33%"), std::string::npos);  // overall 1/3
}

// ---------------------------------------------------------------------------
// Swap consistency
// ---------------------------------------------------------------------------

TEST(SwapConsistency, CountsPassesThatConfirmedEachOther) {
  std::vector<JudgedSample> judged{
      make_judged("s1", "(none)", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("s2", "(none)", PreferenceLabel::A, Choice::B, 0.0),
      make_judged("s3", "(none)", PreferenceLabel::A, Choice::Inconclusive, 0.0),
  };
  judged[2].verdict.note = "order_swap_disagreement";
  EXPECT_NEAR(report::swap_consistency_pct(judged), 66.6667, 1e-3);

  // Inconclusive for other reasons (e.g. parse failures) still counts as
  // consistent: both passes failed the same way.
  judged[2].verdict.note = "parse_empty";
  EXPECT_DOUBLE_EQ(report::swap_consistency_pct(judged), 100.0);
}

TEST(SwapConsistency, EmptyInputThrows) {
  EXPECT_THROW(report::swap_consistency_pct({}), DataError);
}

// ---------------------------------------------------------------------------
// Strategy comparison
// ---------------------------------------------------------------------------

EvalReport quick_report(const std::string& strategy, double accuracy,
                        const std::string& dataset = "synthbar",
                        const std::string& model = "scripted-judge") {
  EvalReport rep;
  rep.meta = meta_for(strategy);
  rep.meta.dataset = dataset;
  rep.meta.model = model;
  rep.sample_count = 100;
  rep.credit = accuracy;
  rep.accuracy_pct = accuracy;
  return rep;
}

TEST(CompareStrategies, RanksByAccuracyWithSharedRanks) {
  std::vector<EvalReport> reports{
      quick_report("pairwise", 70.0),
      quick_report("prepair", 80.0),
      quick_report("pointwise", 60.0),
      quick_report("pairwise-cot", 70.0),
  };
  auto rows = report::compare_strategies(reports);

  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].strategy, "prepair");
  EXPECT_EQ(rows[0].rank, 1);
  EXPECT_FALSE(rows[0].shared_rank);

  // The 70s share rank 2, ordered by name; the 60 drops to rank 4.
  EXPECT_EQ(rows[1].strategy, "pairwise");
  EXPECT_EQ(rows[2].strategy, "pairwise-cot");
  EXPECT_EQ(rows[1].rank, 2);
  EXPECT_EQ(rows[2].rank, 2);
  EXPECT_TRUE(rows[1].shared_rank);
  EXPECT_TRUE(rows[2].shared_rank);
  EXPECT_EQ(rows[3].strategy, "pointwise");
  EXPECT_EQ(rows[3].rank, 4);

  std::string text = report::comparison_to_text(rows);
  EXPECT_NE(text.find("  2=  pairwise"), std::string::npos);
  EXPECT_NE(text.find("  1   prepair"), std::string::npos);
}

TEST(CompareStrategies, RejectsMixedDatasetsAndModels) {
  std::vector<EvalReport> mixed_data{quick_report("pairwise", 70.0),
                                     quick_report("prepair", 80.0, "otherset")};
  EXPECT_THROW(
      {
        try {
          report::compare_strategies(mixed_data);
        } catch (const ConfigError& e) {
          EXPECT_EQ(e.code(), "mismatched_dataset");
          throw;
        }
      },
      ConfigError);

  std::vector<EvalReport> mixed_model{
      quick_report("pairwise", 70.0),
      quick_report("prepair", 80.0, "synthbar", "other-model")};
  EXPECT_THROW(
      {
        try {
          report::compare_strategies(mixed_model);
        } catch (const ConfigError& e) {
          EXPECT_EQ(e.code(), "mismatched_model");
          throw;
        }
      },
      ConfigError);

  EXPECT_THROW(report::compare_strategies({}), DataError);
}

// ---------------------------------------------------------------------------
// Run artifacts
// ---------------------------------------------------------------------------

TEST(RunArtifacts, WritesReproducibleFiles) {
  namespace fs = std::filesystem;
  fs::path out_dir =
      fs::temp_directory_path() / ("report_artifacts_" + std::to_string(::getpid()));
  fs::remove_all(out_dir);

  std::vector<JudgedSample> judged{
      make_judged("a1", "easy", PreferenceLabel::A, Choice::A, 1.0),
      make_judged("a2", "hard", PreferenceLabel::B, Choice::B, 1.0),
  };
  EvalReport rep = report::build_report(judged, meta_for("pairwise"));
  nlohmann::json run_meta{{"elapsed_ms", 12345}};

  report::write_run_artifacts(out_dir, rep, judged, run_meta);

  ASSERT_TRUE(fs::exists(out_dir / "report.json"));
  ASSERT_TRUE(fs::exists(out_dir / "report.txt"));
  ASSERT_TRUE(fs::exists(out_dir / "judgments.jsonl"));
  ASSERT_TRUE(fs::exists(out_dir / "run_meta.json"));

  std::ifstream in(out_dir / "report.json");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string first_bytes = buffer.str();
  EXPECT_EQ(first_bytes.back(), '\n');
  EvalReport parsed = report::report_from_json(nlohmann::json::parse(first_bytes));
  EXPECT_DOUBLE_EQ(parsed.accuracy_pct, 100.0);

  std::ifstream lines(out_dir / "judgments.jsonl");
  std::size_t line_count = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++line_count;
  EXPECT_EQ(line_count, judged.size());

  // Writing the same run again produces identical bytes (timings live in
  // run_meta.json only).
  report::write_run_artifacts(out_dir, rep, judged, nlohmann::json{{"elapsed_ms", 99}});
  std::ifstream again(out_dir / "report.json");
  std::stringstream buffer2;
  buffer2 << again.rdbuf();
  EXPECT_EQ(buffer2.str(), first_bytes);

  fs::remove_all(out_dir);
}

}  // namespace
