#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "metajudge/strategies.hpp"

namespace metajudge::report {

struct SubsetStat {
  std::string subset;
  std::size_t count = 0;
  double credit = 0.0;
  double accuracy_pct = 0.0;  // 100 * credit / count
};

struct VerdictCensus {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t tie = 0;
  std::size_t inconclusive = 0;
};

// Identifying metadata for one evaluation run, echoed into the report.
struct ReportMeta {
  std::string dataset;
  std::string backend;
  std::string model;
  std::string strategy;
  double temperature = 0.0;
  bool order_swap = false;
  double inconclusive_credit = 0.0;
};

struct EvalReport {
  ReportMeta meta;
  std::size_t sample_count = 0;
  double credit = 0.0;
  // Micro average: 100 * total credit / total samples (not a mean of the
  // per-subset accuracies).
  double accuracy_pct = 0.0;
  VerdictCensus verdicts;
  std::vector<SubsetStat> subsets;  // sorted by subset key
};

EvalReport build_report(const std::vector<strategies::JudgedSample>& judged,
                        ReportMeta meta);

// Deterministic rendering: object keys sorted, no timing or environment data.
nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& doc);
std::string report_to_text(const EvalReport& report);

// Share of samples whose swapped pass confirmed the first pass (in percent).
// Only meaningful for runs judged with order_swap.
double swap_consistency_pct(const std::vector<strategies::JudgedSample>& judged);

struct ComparisonRow {
  std::string strategy;
  double accuracy_pct = 0.0;
  std::size_t sample_count = 0;
  int rank = 0;           // competition ranking: 1, 2, 2, 4, ...
  bool shared_rank = false;
};

// Orders reports by accuracy (descending; name breaks exact ties
// deterministically) and assigns ranks; equal accuracies share a rank.
std::vector<ComparisonRow> compare_strategies(const std::vector<EvalReport>& reports);
std::string comparison_to_text(const std::vector<ComparisonRow>& rows);

// Writes report.json, report.txt, and judgments.jsonl into `out_dir`; the
// volatile run_meta (timings, attempt counts) goes to run_meta.json so the
// other artifacts stay byte-reproducible.
void write_run_artifacts(const std::filesystem::path& out_dir, const EvalReport& report,
                         const std::vector<strategies::JudgedSample>& judged,
                         const nlohmann::json& run_meta);

}  // namespace metajudge::report
