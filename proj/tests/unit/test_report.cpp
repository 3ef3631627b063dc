#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "listings.hpp"
#include "oracles.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/report.hpp"
#include "synthaudit/rng.hpp"

using namespace synthaudit;

namespace {

MetricValues uniform_values(double v) {
  MetricValues m;
  for (const auto metric : kAllMetrics) m[metric] = v;
  return m;
}

ReportMetadata metadata() {
  ReportMetadata md;
  md.real_count = 15;
  md.synthetic_counts = {{"a", 10}, {"b", 12}};
  md.config_fingerprint = "abc";
  md.created_at = "2024-01-01T00:00:00Z";
  return md;
}

}  // namespace

TEST_CASE("metric keys and directions") {
  CHECK(kAllMetrics.size() == 11);
  for (const auto metric : kAllMetrics) CHECK(metric_from_key(metric_key(metric)) == metric);
  CHECK_FALSE(metric_from_key("nope").has_value());
  std::size_t higher = 0;
  for (const auto metric : kAllMetrics) higher += direction_of(metric) == Direction::kHigherBetter;
  CHECK(higher == 3);
  CHECK(direction_of(Metric::kBertscoreF1) == Direction::kHigherBetter);
  CHECK(direction_of(Metric::kTtr) == Direction::kHigherBetter);
  CHECK(direction_of(Metric::kMeanNnd) == Direction::kHigherBetter);
  CHECK(direction_of(Metric::kMmd) == Direction::kLowerBetter);
}

TEST_CASE("directions and best cells agree with the published table") {
  const auto doc = testing::read_file((testing::source_dir() / "paper.md").string());
  if (!doc) {
    MESSAGE("paper.md not present; table comparison skipped");
    return;
  }
  const auto table = testing::parse_published_table(*doc);
  REQUIRE(table.directions.size() == kMetricCount);
  REQUIRE(table.models.size() == 3);
  for (std::size_t i = 0; i < kMetricCount; ++i) CHECK(direction_of(kAllMetrics[i]) == table.directions[i]);

  std::map<std::string, MetricValues> scores;
  for (const auto& model : table.models) {
    REQUIRE(table.values.at(model).size() == kMetricCount);
    for (std::size_t i = 0; i < kMetricCount; ++i) scores[model][kAllMetrics[i]] = table.values.at(model)[i];
  }
  const auto report = build_report(scores, metadata());
  for (const auto& model : table.models) {
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      INFO(model << " " << metric_key(kAllMetrics[i]));
      CHECK(report.is_best(model, kAllMetrics[i]) == table.bold.at(model)[i]);
    }
  }
  CHECK(table.values.at(table.models[0])[0] == 0.012);
  CHECK(table.values.at(table.models[1])[0] == 0.027);
}

TEST_CASE("lower mmd wins") {
  auto a = uniform_values(0.5), b = uniform_values(0.5);
  a[Metric::kMmd] = 0.012;
  b[Metric::kMmd] = 0.027;
  const auto report = build_report({{"a", a}, {"b", b}}, metadata());
  CHECK(report.best(Metric::kMmd) == std::vector<std::string>{"a"});
  // Equal columns mark every generator.
  CHECK(report.best(Metric::kTtr).size() == 2);
  const auto single = build_report({{"only", uniform_values(0.3)}}, metadata());
  for (const auto metric : kAllMetrics) CHECK(single.is_best("only", metric));
}

TEST_CASE("incomplete rows are rejected") {
  auto partial = uniform_values(0.5);
  partial.erase(Metric::kTtr);
  try {
    build_report({{"qwen", partial}}, metadata());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncomplete);
    CHECK(std::string(e.what()).find("qwen") != std::string::npos);
    CHECK(std::string(e.what()).find("ttr") != std::string::npos);
  }
  auto bad = uniform_values(0.5);
  bad[Metric::kSms] = std::nan("");
  CHECK_THROWS_AS(build_report({{"x", bad}}, metadata()), Error);
  CHECK_THROWS_AS(build_report({}, metadata()), Error);
}

TEST_CASE("markdown rendering") {
  auto a = uniform_values(0.25), b = uniform_values(0.75);
  GeneratorAnnex annex;
  annex.flagged = {{"s1", "r1", 0.01}};
  annex.top_ngrams = {{"animo bajo", 4}};
  annex.yields["F32"] = CodeYield{};
  const auto report = build_report({{"a", a}, {"b", b}, {"c", uniform_values(0.5)}}, metadata(),
                                   {{"a", annex}});
  const auto md = render_markdown(report);
  CHECK(md.find("MMD ▼") != std::string::npos);
  CHECK(md.find("TTR ▲") != std::string::npos);
  CHECK(md.find("**0.250**") != std::string::npos);
  CHECK(md.find("**0.750**") != std::string::npos);
  std::size_t rows = 0;
  std::istringstream in(md.substr(0, md.find("## Annex")));
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("| a |", 0) == 0 || line.rfind("| b |", 0) == 0 || line.rfind("| c |", 0) == 0) ++rows;
  }
  CHECK(rows == 3);
  CHECK(md.find("s1") != std::string::npos);
  CHECK(md.find("animo bajo") != std::string::npos);
}

TEST_CASE("structured mirror round trip") {
  Rng rng(12);
  std::map<std::string, MetricValues> scores;
  for (const auto* g : {"g1", "g2", "g3"}) {
    for (const auto metric : kAllMetrics) scores[g][metric] = rng.unit() / 3.0;
  }
  GeneratorAnnex annex;
  annex.flagged = {{"s1", "r1", 0.0123456789012345}};
  annex.bertscore_precision = 0.7;
  const auto report = build_report(scores, metadata(), {{"g2", annex}});
  const auto dir = testing::scratch_dir("report");
  render_structured(report, dir / "r.json");
  const auto back = load_structured(dir / "r.json");
  CHECK(back.rows == report.rows);
  CHECK(back.metadata == report.metadata);
  CHECK(back.rows.size() == 3);
  CHECK(back.annexes.at("g2").flagged.at(0).distance == 0.0123456789012345);
  const auto json = report_to_json(report);
  CHECK(json.at("rows").size() == 3);

  // Markdown shows the same values at three decimals.
  const auto md = render_markdown(report);
  for (const auto& [gen, row] : report.rows) {
    for (const double v : row) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", v);
      CHECK(md.find(buf) != std::string::npos);
    }
  }
}

TEST_CASE("best marks follow the direction map on random tables") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, MetricValues> scores;
    const auto generators = 1 + rng.below(4);
    for (std::size_t g = 0; g < generators; ++g) {
      for (const auto metric : kAllMetrics) {
        // Coarse grid so ties occur.
        scores["g" + std::to_string(g)][metric] = double(rng.below(5)) / 4.0;
      }
    }
    const auto report = build_report(scores, metadata());
    for (const auto metric : kAllMetrics) {
      double target = direction_of(metric) == Direction::kLowerBetter ? 1e9 : -1e9;
      for (const auto& [g, values] : scores) {
        target = direction_of(metric) == Direction::kLowerBetter ? std::min(target, values.at(metric))
                                                                 : std::max(target, values.at(metric));
      }
      for (const auto& [g, values] : scores) CHECK(report.is_best(g, metric) == (values.at(metric) == target));
    }
  }
}
