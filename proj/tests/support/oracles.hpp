#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/embed.hpp"
#include "synthaudit/projection.hpp"
#include "synthaudit/report.hpp"
#include "synthaudit/rng.hpp"

namespace synthaudit::testing {

// Mean silhouette coefficient of the group labels in 2D.
inline double silhouette(const std::vector<ProjectedPoint>& points) {
  double total = 0;
  for (const auto& p : points) {
    double same = 0, other = 0;
    std::size_t n_same = 0, n_other = 0;
    for (const auto& q : points) {
      if (&p == &q) continue;
      const double d = std::hypot(p.x - q.x, p.y - q.y);
      if (q.group == p.group) {
        same += d;
        ++n_same;
      } else {
        other += d;
        ++n_other;
      }
    }
    const double a = same / n_same, b = other / n_other;
    total += (b - a) / std::max(a, b);
  }
  return total / points.size();
}

// 25 real and 25 synthetic reports over two disjoint vocabularies, with
// hash text embeddings.
struct ClusterFixture {
  std::vector<ClinicalReport> reports;
  EmbeddingSet embeddings{256, Granularity::kText};
};

inline ClusterFixture two_clusters(std::uint64_t seed = 9) {
  const std::vector<std::string> vocab_a{"tristeza", "llanto",  "apatia", "insomnio",
                                         "fatiga",   "culpa",   "anhedonia", "apetito"};
  const std::vector<std::string> vocab_b{"palpitaciones", "temblor", "sudor", "miedo",
                                         "inquietud",     "tension", "mareo", "nervios"};
  Rng rng(seed);
  ClusterFixture fixture;
  for (int cluster = 0; cluster < 2; ++cluster) {
    const auto& vocab = cluster == 0 ? vocab_a : vocab_b;
    for (int i = 0; i < 25; ++i) {
      std::string text;
      for (int w = 0; w < 5; ++w) text += vocab[rng.below(vocab.size())] + " ";
      ClinicalReport r;
      r.id = (cluster == 0 ? "a-" : "b-") + std::to_string(100 + i);
      r.text = text;
      r.codes = {IcdCode("F32")};
      r.source = cluster == 0 ? Source::kReal : Source::kSynthetic;
      if (cluster == 1) r.generator = "modelo-b";
      fixture.embeddings.add(r.id, hash_embed(text, 256, 3));
      fixture.reports.push_back(r);
    }
  }
  return fixture;
}

// Results table of a LaTeX-flavoured markdown document: header arrows,
// per-model values and which cells are bold.
struct PublishedTable {
  std::vector<std::string> models;
  std::vector<Direction> directions;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, std::vector<bool>> bold;
};

inline PublishedTable parse_published_table(const std::string& doc) {
  PublishedTable table;
  const auto begin = doc.find("\\begin{table}");
  if (begin == std::string::npos) return table;
  const auto end = doc.find("\\end{table}", begin);
  std::istringstream in(doc.substr(begin, end - begin));
  static const std::regex row(R"(^\s*\\texttt\{([^}]*)\}\s*&(.*)\\\\\s*$)");
  static const std::regex number("([0-9]+\\.[0-9]+)");
  for (std::string line; std::getline(in, line);) {
    if (line.find("\\textbf{") != std::string::npos &&
        line.find("blacktriangle") != std::string::npos) {
      table.directions.push_back(line.find("blacktriangledown") != std::string::npos
                                     ? Direction::kLowerBetter
                                     : Direction::kHigherBetter);
      continue;
    }
    std::smatch m;
    if (!std::regex_match(line, m, row)) continue;
    const auto model = m[1].str();
    if (!table.values.contains(model)) table.models.push_back(model);
    std::stringstream cells(m[2].str());
    for (std::string cell; std::getline(cells, cell, '&');) {
      std::smatch n;
      if (!std::regex_search(cell, n, number)) continue;
      table.values[model].push_back(std::stod(n[1].str()));
      table.bold[model].push_back(cell.find("\\textbf") != std::string::npos);
    }
  }
  return table;
}

}  // namespace synthaudit::testing
