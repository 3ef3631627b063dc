#include "synthaudit/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "synthaudit/error.hpp"

namespace synthaudit {
namespace {

using nlohmann::ordered_json;

struct MetricInfo {
  Metric metric;
  std::string_view key;
  std::string_view label;
  Direction direction;
};

constexpr std::array<MetricInfo, kMetricCount> kMetricInfo = {{
    {Metric::kMmd, "mmd", "MMD", Direction::kLowerBetter},
    {Metric::kBertscoreF1, "bertscore_f1", "BERTScore F1", Direction::kHigherBetter},
    {Metric::kSms, "sms", "SMS", Direction::kLowerBetter},
    {Metric::kRouge1, "rouge1", "ROUGE-1", Direction::kLowerBetter},
    {Metric::kRouge2, "rouge2", "ROUGE-2", Direction::kLowerBetter},
    {Metric::kRougeL, "rougeL", "ROUGE-L", Direction::kLowerBetter},
    {Metric::kMeteor, "meteor", "METEOR", Direction::kLowerBetter},
    {Metric::kSelfBleu, "self_bleu", "Self-BLEU", Direction::kLowerBetter},
    {Metric::kTtr, "ttr", "TTR", Direction::kHigherBetter},
    {Metric::kMeanNnd, "mean_nnd", "NND", Direction::kHigherBetter},
    {Metric::kPlagiarismRate, "plagiarism_rate", "Plagiarism rate",
     Direction::kLowerBetter},
}};

const MetricInfo& info(Metric metric) {
  return kMetricInfo[static_cast<std::size_t>(metric)];
}

std::string markdown_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out.push_back(' ');
    else out.push_back(c);
  }
  return out;
}

ordered_json annex_to_json(const GeneratorAnnex& annex) {
  ordered_json doc;
  doc["bertscore_precision"] = annex.bertscore_precision;
  doc["bertscore_recall"] = annex.bertscore_recall;
  doc["yields"] = yields_to_json(annex.yields);
  auto flagged = ordered_json::array();
  for (const auto& pair : annex.flagged) {
    flagged.push_back(ordered_json{{"synthetic_id", pair.synthetic_id},
                                   {"real_id", pair.real_id},
                                   {"distance", pair.distance}});
  }
  doc["flagged"] = std::move(flagged);
  auto ngrams = ordered_json::array();
  for (const auto& entry : annex.top_ngrams) {
    ngrams.push_back(ordered_json{{"ngram", entry.ngram}, {"count", entry.count}});
  }
  doc["top_ngrams"] = std::move(ngrams);
  return doc;
}

GeneratorAnnex annex_from_json(const nlohmann::json& doc) {
  GeneratorAnnex annex;
  annex.bertscore_precision = doc.at("bertscore_precision").get<double>();
  annex.bertscore_recall = doc.at("bertscore_recall").get<double>();
  annex.yields = yields_from_json(doc.at("yields"));
  for (const auto& pair : doc.at("flagged")) {
    annex.flagged.push_back({pair.at("synthetic_id").get<std::string>(),
                             pair.at("real_id").get<std::string>(),
                             pair.at("distance").get<double>()});
  }
  for (const auto& entry : doc.at("top_ngrams")) {
    annex.top_ngrams.push_back(
        {entry.at("ngram").get<std::string>(), entry.at("count").get<std::size_t>()});
  }
  return annex;
}

}  // namespace

Direction direction_of(Metric metric) { return info(metric).direction; }
std::string_view metric_key(Metric metric) { return info(metric).key; }
std::string_view metric_label(Metric metric) { return info(metric).label; }

std::optional<Metric> metric_from_key(std::string_view key) {
  for (const auto& entry : kMetricInfo) {
    if (entry.key == key) return entry.metric;
  }
  return std::nullopt;
}

MetricValues collect_metrics(const FidelityScores& fidelity,
                             const DiversityScores& diversity,
                             const PrivacyScores& privacy) {
  return {
      {Metric::kMmd, fidelity.mmd},
      {Metric::kBertscoreF1, fidelity.bertscore_f1},
      {Metric::kSms, fidelity.sms},
      {Metric::kRouge1, fidelity.rouge1},
      {Metric::kRouge2, fidelity.rouge2},
      {Metric::kRougeL, fidelity.rougeL},
      {Metric::kMeteor, fidelity.meteor},
      {Metric::kSelfBleu, diversity.self_bleu},
      {Metric::kTtr, diversity.ttr},
      {Metric::kMeanNnd, privacy.mean_nnd},
      {Metric::kPlagiarismRate, privacy.plagiarism_rate},
  };
}

double EvaluationReport::value(const std::string& generator, Metric metric) const {
  const auto it = rows.find(generator);
  if (it == rows.end()) {
    throw Error(ErrorCode::kNotFound, "no report row for generator " + generator);
  }
  return it->second[static_cast<std::size_t>(metric)];
}

std::vector<std::string> EvaluationReport::best(Metric metric) const {
  std::vector<std::string> winners;
  if (rows.empty()) return winners;
  const auto column = static_cast<std::size_t>(metric);
  const bool lower = direction_of(metric) == Direction::kLowerBetter;
  double best_value = rows.begin()->second[column];
  for (const auto& [generator, values] : rows) {
    const double v = values[column];
    if (lower ? v < best_value : v > best_value) best_value = v;
  }
  for (const auto& [generator, values] : rows) {
    if (values[column] == best_value) winners.push_back(generator);
  }
  return winners;
}

bool EvaluationReport::is_best(const std::string& generator, Metric metric) const {
  const auto winners = best(metric);
  return std::find(winners.begin(), winners.end(), generator) != winners.end();
}

EvaluationReport build_report(const std::map<std::string, MetricValues>& scores,
                              ReportMetadata metadata,
                              std::map<std::string, GeneratorAnnex> annexes) {
  if (scores.empty()) {
    throw Error(ErrorCode::kIncomplete, "report needs at least one generator");
  }
  EvaluationReport report;
  for (const auto& [generator, values] : scores) {
    std::array<double, kMetricCount> row{};
    for (const auto metric : kAllMetrics) {
      const auto it = values.find(metric);
      if (it == values.end()) {
        throw Error(ErrorCode::kIncomplete,
                    fmt::format("generator {} is missing metric {}", generator,
                                metric_key(metric)));
      }
      if (!std::isfinite(it->second)) {
        throw Error(ErrorCode::kIncomplete,
                    fmt::format("generator {} has non-finite {}", generator,
                                metric_key(metric)));
      }
      row[static_cast<std::size_t>(metric)] = it->second;
    }
    report.rows.emplace(generator, row);
  }
  report.metadata = std::move(metadata);
  report.annexes = std::move(annexes);
  return report;
}

std::string render_markdown(const EvaluationReport& report) {
  std::string out = "# Synthetic corpus evaluation\n\n";
  out += fmt::format("- Real reports: {}\n", report.metadata.real_count);
  for (const auto& [generator, count] : report.metadata.synthetic_counts) {
    out += fmt::format("- Synthetic reports ({}): {}\n", markdown_cell(generator), count);
  }
  if (!report.metadata.config_fingerprint.empty()) {
    out += fmt::format("- Config fingerprint: `{}`\n", report.metadata.config_fingerprint);
  }
  if (!report.metadata.created_at.empty()) {
    out += fmt::format("- Created: {}\n", report.metadata.created_at);
  }
  out += "\n";

  out += "| Generator |";
  for (const auto metric : kAllMetrics) {
    out += fmt::format(" {} {} |", metric_label(metric),
                       direction_of(metric) == Direction::kLowerBetter ? "▼" : "▲");
  }
  out += "\n|---|";
  for (std::size_t i = 0; i < kMetricCount; ++i) out += "---:|";
  out += "\n";
  for (const auto& [generator, values] : report.rows) {
    out += "| " + markdown_cell(generator) + " |";
    for (const auto metric : kAllMetrics) {
      const auto cell = fmt::format("{:.3f}", values[static_cast<std::size_t>(metric)]);
      out += report.is_best(generator, metric) ? " **" + cell + "** |" : " " + cell + " |";
    }
    out += "\n";
  }
  out += "\n▼ lower is better, ▲ higher is better; best value per column in bold.\n";

  bool any_yields = false;
  for (const auto& [generator, annex] : report.annexes) any_yields |= !annex.yields.empty();
  if (any_yields) {
    out += "\n## Annex: per-code yield\n\n| Generator | Code | Requested | Produced | "
           "Attempts | Failure |\n|---|---|---:|---:|---:|---|\n";
    for (const auto& [generator, annex] : report.annexes) {
      for (const auto& [code, yield] : annex.yields) {
        out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", markdown_cell(generator),
                           markdown_cell(code), yield.requested, yield.produced,
                           yield.attempts, markdown_cell(yield.failure.value_or("")));
      }
    }
  }

  out += "\n## Annex: flagged plagiarism pairs\n\n";
  std::size_t flagged_total = 0;
  for (const auto& [generator, annex] : report.annexes) flagged_total += annex.flagged.size();
  if (flagged_total == 0) {
    out += "No synthetic report fell below the plagiarism threshold.\n";
  } else {
    out += "| Generator | Synthetic id | Real id | Distance |\n|---|---|---|---:|\n";
    for (const auto& [generator, annex] : report.annexes) {
      for (const auto& pair : annex.flagged) {
        out += fmt::format("| {} | {} | {} | {:.4f} |\n", markdown_cell(generator),
                           markdown_cell(pair.synthetic_id), markdown_cell(pair.real_id),
                           pair.distance);
      }
    }
  }

  bool any_ngrams = false;
  for (const auto& [generator, annex] : report.annexes) any_ngrams |= !annex.top_ngrams.empty();
  if (any_ngrams) {
    out += "\n## Annex: frequent n-grams\n";
    for (const auto& [generator, annex] : report.annexes) {
      if (annex.top_ngrams.empty()) continue;
      out += fmt::format("\n### {}\n\n| N-gram | Count |\n|---|---:|\n", markdown_cell(generator));
      for (const auto& entry : annex.top_ngrams) {
        out += fmt::format("| {} | {} |\n", markdown_cell(entry.ngram), entry.count);
      }
    }
  }
  return out;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  ordered_json doc;
  ordered_json directions;
  for (const auto metric : kAllMetrics) {
    directions[std::string(metric_key(metric))] =
        direction_of(metric) == Direction::kLowerBetter ? "lower_better" : "higher_better";
  }
  doc["directions"] = std::move(directions);

  ordered_json rows;
  for (const auto& [generator, values] : report.rows) {
    ordered_json row;
    for (const auto metric : kAllMetrics) {
      row[std::string(metric_key(metric))] = values[static_cast<std::size_t>(metric)];
    }
    rows[generator] = std::move(row);
  }
  doc["rows"] = std::move(rows);

  ordered_json best;
  for (const auto metric : kAllMetrics) best[std::string(metric_key(metric))] = report.best(metric);
  doc["best"] = std::move(best);

  ordered_json metadata;
  metadata["real_count"] = report.metadata.real_count;
  metadata["synthetic_counts"] = report.metadata.synthetic_counts;
  metadata["config_fingerprint"] = report.metadata.config_fingerprint;
  metadata["created_at"] = report.metadata.created_at;
  doc["metadata"] = std::move(metadata);

  ordered_json annexes = ordered_json::object();
  for (const auto& [generator, annex] : report.annexes) annexes[generator] = annex_to_json(annex);
  doc["annexes"] = std::move(annexes);
  return doc;
}

EvaluationReport report_from_json(const nlohmann::json& doc) {
  try {
    std::map<std::string, MetricValues> scores;
    for (const auto& [generator, row] : doc.at("rows").items()) {
      auto& values = scores[generator];
      for (const auto& [key, value] : row.items()) {
        const auto metric = metric_from_key(key);
        if (!metric) throw Error(ErrorCode::kFormat, "unknown metric " + key);
        values[*metric] = value.get<double>();
      }
    }
    ReportMetadata metadata;
    const auto& meta = doc.at("metadata");
    metadata.real_count = meta.at("real_count").get<std::size_t>();
    metadata.synthetic_counts =
        meta.at("synthetic_counts").get<std::map<std::string, std::size_t>>();
    metadata.config_fingerprint = meta.at("config_fingerprint").get<std::string>();
    metadata.created_at = meta.at("created_at").get<std::string>();
    std::map<std::string, GeneratorAnnex> annexes;
    if (doc.contains("annexes")) {
      for (const auto& [generator, annex] : doc["annexes"].items()) {
        annexes[generator] = annex_from_json(annex);
      }
    }
    return build_report(scores, std::move(metadata), std::move(annexes));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "evaluation report: " + std::string(e.what()));
  }
}

void render_structured(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

EvaluationReport load_structured(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  try {
    return report_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace synthaudit
