#include <doctest.h>

#include <cmath>
#include <sstream>

#include "synthaudit/error.hpp"
#include "synthaudit/privacy.hpp"
#include "synthaudit/rng.hpp"
#include "synthaudit/tsv.hpp"

using namespace synthaudit;

namespace {

EmbeddingSet text_set(std::size_t dim, const std::vector<std::pair<std::string, Vector>>& entries) {
  EmbeddingSet set(dim, Granularity::kText);
  for (const auto& [id, v] : entries) set.add(id, unit_normalize(v));
  return set;
}

NeighborMap distances(std::initializer_list<double> values) {
  NeighborMap map;
  int i = 0;
  for (const double d : values) map["s" + std::to_string(i++)] = Neighbor{"r", d};
  return map;
}

EmbeddingSet random_set(Rng& rng, const std::string& prefix, std::size_t count, std::size_t dim) {
  EmbeddingSet set(dim, Granularity::kText);
  for (std::size_t i = 0; i < count; ++i) {
    Vector v(dim);
    for (auto& x : v) x = rng.normal();
    set.add(prefix + std::to_string(i), unit_normalize(v));
  }
  return set;
}

ClinicalReport report(const std::string& id, const std::string& text, Source source) {
  ClinicalReport r;
  r.id = id;
  r.text = text;
  r.codes = {IcdCode("F32")};
  r.source = source;
  if (source == Source::kSynthetic) r.generator = "g";
  return r;
}

}  // namespace

TEST_CASE("nearest neighbor examples") {
  const auto real = text_set(2, {{"r-axis", {0, 1}}, {"r-blend", {1, 1}}});
  const auto synthetic = text_set(2, {{"s", {1, 0}}});
  const auto map = nnd(synthetic, real);
  CHECK(map.at("s").real_id == "r-blend");
  // Oracle: 1 - <e0, (e0+e1)/sqrt2>.
  CHECK(map.at("s").distance == doctest::Approx(1 - 1 / std::sqrt(2.0)).epsilon(1e-12));

  const auto copies = nnd(text_set(2, {{"s", {0, 1}}}), real);
  CHECK(copies.at("s") == Neighbor{"r-axis", 0.0});

  const auto tie = nnd(text_set(2, {{"s", {1, 0}}}), text_set(2, {{"b", {0, 1}}, {"a", {0, -1}}, {"c", {0, 1}}}));
  CHECK(tie.at("s").real_id == "a");

  CHECK_THROWS_AS(nnd(EmbeddingSet(2, Granularity::kText), real), Error);
  CHECK_THROWS_AS(nnd(text_set(3, {{"s", {1, 0, 0}}}), real), Error);
}

TEST_CASE("scores and the strict threshold") {
  const PrivacyConfig config;
  const auto scores = privacy_scores(distances({0.04, 0.06}), config);
  CHECK(scores.plagiarism_rate == 0.5);
  CHECK(scores.mean_nnd == doctest::Approx(0.05));
  REQUIRE(scores.flagged.size() == 1);
  CHECK(scores.flagged[0].distance == 0.04);
  CHECK(privacy_scores(distances({0.05}), config).plagiarism_rate == 0.0);
  CHECK_THROWS_AS(privacy_scores(NeighborMap{}, config), Error);
  CHECK_THROWS_AS(PrivacyConfig{0.0}.validate(), Error);
  CHECK_THROWS_AS(PrivacyConfig{2.0}.validate(), Error);
}

TEST_CASE("verbatim copies are all flagged") {
  Rng rng(2);
  const auto real = random_set(rng, "r", 6, 8);
  EmbeddingSet synthetic(8, Granularity::kText);
  for (const auto& id : real.ids()) synthetic.add("copy-" + id, real.vector(id));
  const auto scores = privacy_scores(nnd(synthetic, real, 3), PrivacyConfig{});
  CHECK(scores.mean_nnd <= 1e-12);
  CHECK(scores.plagiarism_rate == 1.0);
  for (const auto& pair : scores.flagged) CHECK(pair.synthetic_id == "copy-" + pair.real_id);
}

TEST_CASE("properties over random sets") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto real = random_set(rng, "r", 1 + rng.below(8), 3);
    const auto synthetic = random_set(rng, "s", 1 + rng.below(8), 3);
    const auto map = nnd(synthetic, real, 1 + rng.below(3));

    // Brute-force neighbor oracle.
    for (const auto& sid : synthetic.ids()) {
      double best = 1e9;
      for (const auto& rid : real.ids()) best = std::min(best, cosine_distance(synthetic.vector(sid), real.vector(rid)));
      CHECK(map.at(sid).distance == doctest::Approx(best).epsilon(1e-12));
    }

    double previous = -1;
    for (double t = 0.01; t < 2.0; t += 0.1) {
      const double rate = privacy_scores(map, PrivacyConfig{t}).plagiarism_rate;
      CHECK(rate >= previous);
      previous = rate;
    }

    auto grown = real;
    Vector extra(3);
    for (auto& x : extra) x = rng.normal();
    grown.add("zz-extra", unit_normalize(extra));
    const auto grown_map = nnd(synthetic, grown);
    for (const auto& [sid, n] : map) CHECK(grown_map.at(sid).distance <= n.distance);
  }
}

TEST_CASE("audit file") {
  const Corpus real({report("r1", "texto\treal", Source::kReal)});
  const Corpus synthetic({report("s1", "texto sintetico", Source::kSynthetic),
                          report("s2", "otro", Source::kSynthetic)});
  NeighborMap map{{"s1", {"r1", 0.01}}, {"s2", {"r1", 0.5}}};
  const auto tsv_text = audit_tsv(privacy_scores(map, PrivacyConfig{}), synthetic, real);
  std::istringstream in(tsv_text);
  std::string header, line, rest;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == "synthetic_id\treal_id\tdistance\tsynthetic_text\treal_text");
  const auto fields = tsv::split_row(line);
  REQUIRE(fields.size() == 5);
  CHECK(fields[0] == "s1");
  CHECK(fields[1] == "r1");
  CHECK(std::stod(fields[2]) == 0.01);
  CHECK(fields[3] == "texto sintetico");
  CHECK(fields[4] == "texto\treal");
  CHECK_FALSE(std::getline(in, rest));
}
