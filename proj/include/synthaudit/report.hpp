#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthaudit/diversity.hpp"
#include "synthaudit/fidelity.hpp"
#include "synthaudit/genclient.hpp"
#include "synthaudit/privacy.hpp"

namespace synthaudit {

// The eleven comparison columns, in table order.
enum class Metric {
  kMmd,
  kBertscoreF1,
  kSms,
  kRouge1,
  kRouge2,
  kRougeL,
  kMeteor,
  kSelfBleu,
  kTtr,
  kMeanNnd,
  kPlagiarismRate,
};

inline constexpr std::size_t kMetricCount = 11;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::kMmd,     Metric::kBertscoreF1, Metric::kSms,      Metric::kRouge1,
    Metric::kRouge2,  Metric::kRougeL,      Metric::kMeteor,   Metric::kSelfBleu,
    Metric::kTtr,     Metric::kMeanNnd,     Metric::kPlagiarismRate};

enum class Direction { kLowerBetter, kHigherBetter };

Direction direction_of(Metric metric);
std::string_view metric_key(Metric metric);     // "mmd", "rougeL", ...
std::string_view metric_label(Metric metric);   // "MMD", "ROUGE-L", ...
std::optional<Metric> metric_from_key(std::string_view key);

using MetricValues = std::map<Metric, double>;

MetricValues collect_metrics(const FidelityScores& fidelity,
                             const DiversityScores& diversity,
                             const PrivacyScores& privacy);

struct ReportMetadata {
  std::size_t real_count = 0;
  std::map<std::string, std::size_t> synthetic_counts;
  std::string config_fingerprint;
  std::string created_at;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct GeneratorAnnex {
  std::map<std::string, CodeYield> yields;
  std::vector<FlaggedPair> flagged;
  std::vector<NgramCount> top_ngrams;
  double bertscore_precision = 0.0;
  double bertscore_recall = 0.0;
};

struct EvaluationReport {
  std::map<std::string, std::array<double, kMetricCount>> rows;
  ReportMetadata metadata;
  std::map<std::string, GeneratorAnnex> annexes;

  double value(const std::string& generator, Metric metric) const;
  // Generators holding the best value of a column (ties share the mark).
  std::vector<std::string> best(Metric metric) const;
  bool is_best(const std::string& generator, Metric metric) const;
};

// Throws Error(kIncomplete) naming the generator and metric when a row is
// missing a value or holds a non-finite one.
EvaluationReport build_report(const std::map<std::string, MetricValues>& scores,
                              ReportMetadata metadata,
                              std::map<std::string, GeneratorAnnex> annexes = {});

std::string render_markdown(const EvaluationReport& report);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& doc);
void render_structured(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport load_structured(const std::filesystem::path& path);

}  // namespace synthaudit
