#include "metajudge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "metajudge/errors.hpp"
#include "metajudge/jsonio.hpp"

namespace metajudge::report {

using nlohmann::json;
using strategies::JudgedSample;

namespace {

double pct(double credit, std::size_t count) {
  return count == 0 ? 0.0 : 100.0 * credit / static_cast<double>(count);
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

EvalReport build_report(const std::vector<JudgedSample>& judged, ReportMeta meta) {
  if (judged.empty()) throw DataError("empty_input", "no judged samples to report on");
  EvalReport report;
  report.meta = std::move(meta);
  report.sample_count = judged.size();

  std::map<std::string, SubsetStat> by_subset;
  for (const auto& sample : judged) {
    report.credit += sample.credit;
    SubsetStat& stat = by_subset[sample.subset];
    stat.subset = sample.subset;
    ++stat.count;
    stat.credit += sample.credit;
    switch (sample.verdict.choice) {
      case Choice::A:
        ++report.verdicts.a;
        break;
      case Choice::B:
        ++report.verdicts.b;
        break;
      case Choice::Tie:
        ++report.verdicts.tie;
        break;
      case Choice::Inconclusive:
        ++report.verdicts.inconclusive;
        break;
    }
  }
  report.accuracy_pct = pct(report.credit, report.sample_count);
  for (auto& [key, stat] : by_subset) {
    stat.accuracy_pct = pct(stat.credit, stat.count);
    report.subsets.push_back(stat);
  }
  return report;
}

json report_to_json(const EvalReport& report) {
  json subsets = json::array();
  for (const auto& stat : report.subsets)
    subsets.push_back({{"subset", stat.subset},
                       {"count", stat.count},
                       {"credit", stat.credit},
                       {"accuracy_pct", stat.accuracy_pct}});

  return json{{"dataset", report.meta.dataset},
              {"backend", report.meta.backend},
              {"model", report.meta.model},
              {"strategy", report.meta.strategy},
              {"temperature", report.meta.temperature},
              {"order_swap", report.meta.order_swap},
              {"inconclusive_credit", report.meta.inconclusive_credit},
              {"sample_count", report.sample_count},
              {"credit", report.credit},
              {"accuracy_pct", report.accuracy_pct},
              {"verdicts",
               {{"A", report.verdicts.a},
                {"B", report.verdicts.b},
                {"Tie", report.verdicts.tie},
                {"Inconclusive", report.verdicts.inconclusive}}},
              {"subsets", std::move(subsets)}};
}

EvalReport report_from_json(const json& doc) {
  EvalReport report;
  try {
    report.meta.dataset = doc.at("dataset").get<std::string>();
    report.meta.backend = doc.at("backend").get<std::string>();
    report.meta.model = doc.at("model").get<std::string>();
    report.meta.strategy = doc.at("strategy").get<std::string>();
    report.meta.temperature = doc.at("temperature").get<double>();
    report.meta.order_swap = doc.at("order_swap").get<bool>();
    report.meta.inconclusive_credit = doc.at("inconclusive_credit").get<double>();
    report.sample_count = doc.at("sample_count").get<std::size_t>();
    report.credit = doc.at("credit").get<double>();
    report.accuracy_pct = doc.at("accuracy_pct").get<double>();
    const json& verdicts = doc.at("verdicts");
    report.verdicts.a = verdicts.at("A").get<std::size_t>();
    report.verdicts.b = verdicts.at("B").get<std::size_t>();
    report.verdicts.tie = verdicts.at("Tie").get<std::size_t>();
    report.verdicts.inconclusive = verdicts.at("Inconclusive").get<std::size_t>();
    for (const json& entry : doc.at("subsets")) {
      SubsetStat stat;
      stat.subset = entry.at("subset").get<std::string>();
      stat.count = entry.at("count").get<std::size_t>();
      stat.credit = entry.at("credit").get<double>();
      stat.accuracy_pct = entry.at("accuracy_pct").get<double>();
      report.subsets.push_back(std::move(stat));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed_record", std::string("report.json: ") + e.what());
  }
  return report;
}

std::string report_to_text(const EvalReport& report) {
  std::string out;
  char line[256];

  std::snprintf(line, sizeof(line), "dataset: %s   strategy: %s   backend: %s (%s)\n",
                report.meta.dataset.c_str(), report.meta.strategy.c_str(),
                report.meta.backend.c_str(), report.meta.model.c_str());
  out += line;
  std::snprintf(line, sizeof(line),
                "temperature: %s   order_swap: %s   inconclusive_credit: %s\n",
                fixed(report.meta.temperature, 2).c_str(),
                report.meta.order_swap ? "on" : "off",
                fixed(report.meta.inconclusive_credit, 2).c_str());
  out += line;
  out += "\n";

  std::snprintf(line, sizeof(line), "%-16s %7s %9s %10s\n", "subset", "count", "credit",
                "accuracy");
  out += line;
  for (const auto& stat : report.subsets) {
    std::snprintf(line, sizeof(line), "%-16s %7zu %9s %9s%%\n", stat.subset.c_str(),
                  stat.count, fixed(stat.credit, 2).c_str(),
                  fixed(stat.accuracy_pct, 2).c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-16s %7zu %9s %9s%%\n", "TOTAL", report.sample_count,
                fixed(report.credit, 2).c_str(), fixed(report.accuracy_pct, 2).c_str());
  out += line;

  std::snprintf(line, sizeof(line), "\nverdicts: A=%zu B=%zu Tie=%zu Inconclusive=%zu\n",
                report.verdicts.a, report.verdicts.b, report.verdicts.tie,
                report.verdicts.inconclusive);
  out += line;
  return out;
}

double swap_consistency_pct(const std::vector<JudgedSample>& judged) {
  if (judged.empty()) throw DataError("empty_input", "no judged samples for swap consistency");
  std::size_t consistent = 0;
  for (const auto& sample : judged)
    if (sample.verdict.note != "order_swap_disagreement") ++consistent;
  return 100.0 * static_cast<double>(consistent) / static_cast<double>(judged.size());
}

std::vector<ComparisonRow> compare_strategies(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw DataError("empty_input", "no reports to compare");
  // Accuracies are only comparable within one dataset and one judge model.
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].meta.dataset != reports.front().meta.dataset)
      throw ConfigError("runs cover different datasets ('" + reports.front().meta.dataset +
                            "' vs '" + reports[i].meta.dataset + "')",
                        "mismatched_dataset");
    if (reports[i].meta.model != reports.front().meta.model)
      throw ConfigError("runs cover different judge models ('" + reports.front().meta.model +
                            "' vs '" + reports[i].meta.model + "')",
                        "mismatched_model");
  }

  std::vector<ComparisonRow> rows;
  rows.reserve(reports.size());
  for (const auto& report : reports)
    rows.push_back(
        {report.meta.strategy, report.accuracy_pct, report.sample_count, 0, false});

  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& x, const ComparisonRow& y) {
    if (x.accuracy_pct != y.accuracy_pct) return x.accuracy_pct > y.accuracy_pct;
    return x.strategy < y.strategy;
  });

  // Competition ranking; accuracies within 1e-9 share a rank.
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    while (j < rows.size() && std::abs(rows[j].accuracy_pct - rows[i].accuracy_pct) <= 1e-9)
      ++j;
    for (std::size_t k = i; k < j; ++k) {
      rows[k].rank = static_cast<int>(i) + 1;
      rows[k].shared_rank = (j - i) > 1;
    }
    i = j;
  }
  return rows;
}

std::string comparison_to_text(const std::vector<ComparisonRow>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%4s  %-16s %9s %8s\n", "rank", "strategy", "accuracy",
                "samples");
  out += line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%3d%c  %-16s %8s%% %8zu\n", row.rank,
                  row.shared_rank ? '=' : ' ', row.strategy.c_str(),
                  fixed(row.accuracy_pct, 2).c_str(), row.sample_count);
    out += line;
  }
  return out;
}

void write_run_artifacts(const std::filesystem::path& out_dir, const EvalReport& report,
                         const std::vector<JudgedSample>& judged, const json& run_meta) {
  std::filesystem::create_directories(out_dir);
  jsonio::write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  jsonio::write_file(out_dir / "report.txt", report_to_text(report));

  std::vector<json> lines;
  lines.reserve(judged.size());
  for (const auto& sample : judged) lines.push_back(strategies::judged_to_json(sample));
  jsonio::write_records_lines(out_dir / "judgments.jsonl", lines);

  jsonio::write_file(out_dir / "run_meta.json", run_meta.dump(2) + "\n");
}

}  // namespace metajudge::report
