#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "listings.hpp"
#include "oracles.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/projection.hpp"
#include "synthaudit/rng.hpp"

using namespace synthaudit;

namespace {

double entropy_at(const std::vector<double>& d, double beta) {
  double z = 0;
  for (const double x : d) z += std::exp(-beta * x);
  double h = 0;
  for (const double x : d) {
    const double p = std::exp(-beta * x) / z;
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

// Oracle: plain bisection on entropy, which decreases in beta.
double beta_oracle(const std::vector<double>& d, double perplexity) {
  double lo = 1e-12, hi = 1e6;
  const double target = std::log(perplexity);
  for (int i = 0; i < 400; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (entropy_at(d, mid) > target) lo = mid;
    else hi = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<Vector> gaussian_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(dim);
    for (auto& x : v) x = rng.normal();
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("perplexity search") {
  const std::vector<double> two{1.0, 1.0};
  const auto uniform = perplexity_search(two, 2.0);
  const auto p = conditional_probabilities(two, uniform.beta);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(entropy_at(two, uniform.beta) == doctest::Approx(std::log(2.0)).epsilon(1e-5));

  const std::vector<double> three{1.0, 1.0, 4.0};
  const auto found = perplexity_search(three, 2.0);
  // Perplexity 2 is only the large-beta limit here, so check the tolerance condition.
  CHECK(found.converged);
  CHECK(std::abs(entropy_at(three, found.beta) - std::log(2.0)) <= 1e-5);

  const auto interior = perplexity_search(three, 2.5);
  CHECK(interior.converged);
  CHECK(interior.beta == doctest::Approx(beta_oracle(three, 2.5)).epsilon(1e-4));

  const std::vector<double> scaled{3.0, 3.0, 12.0};
  CHECK(perplexity_search(scaled, 2.5).beta == doctest::Approx(interior.beta / 3).epsilon(1e-4));

  const std::vector<double> zeros{0.0, 0.0, 0.0};
  CHECK(perplexity_search(zeros, 2.0).beta == 1.0);
  CHECK_THROWS_AS(perplexity_search(std::vector<double>{1.0}, 2.0), Error);
}

TEST_CASE("affinities and similarities are joint distributions") {
  const auto points = gaussian_points(12, 4, 6);
  const auto p = tsne_affinities(points, effective_perplexity(30, points.size()));
  Rng rng(1);
  Matrix layout(12, 2);
  for (std::size_t i = 0; i < 12; ++i) {
    layout(i, 0) = rng.normal();
    layout(i, 1) = rng.normal();
  }
  const auto q = tsne_similarities(layout);
  for (const Matrix* m : {&p, &q}) {
    double sum = 0;
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK((*m)(i, i) == 0.0);
      for (std::size_t j = 0; j < 12; ++j) {
        CHECK((*m)(i, j) >= 0.0);
        CHECK((*m)(i, j) == doctest::Approx((*m)(j, i)).epsilon(1e-15));
        sum += (*m)(i, j);
      }
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(kl_divergence(p, q) >= 0.0);
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0));
}

TEST_CASE("perplexity clamp and parameter validation") {
  CHECK(effective_perplexity(30, 10) < 3.0);
  CHECK(effective_perplexity(5, 100) == 5.0);
  TsneParams params;
  CHECK_NOTHROW(params.validate());
  params.iterations = 100;
  CHECK_THROWS_AS(params.validate(), Error);
  params = TsneParams{};
  params.perplexity = 1.0;
  CHECK_THROWS_AS(params.validate(), Error);
  CHECK_THROWS_AS(tsne(gaussian_points(4, 3, 1), TsneParams{}), Error);
}

TEST_CASE("tsne is deterministic and decreases the divergence") {
  const auto points = gaussian_points(30, 6, 2);
  TsneParams params;
  params.perplexity = 8;
  params.iterations = 400;
  params.seed = 42;
  const auto a = tsne(points, params);
  const auto b = tsne(points, params);
  CHECK(a.layout == b.layout);
  CHECK(a.final_kl < a.initial_kl);
  for (const double v : a.layout.data()) CHECK(std::isfinite(v));
  params.seed = 43;
  CHECK_FALSE(tsne(points, params).layout == a.layout);
}

TEST_CASE("two token-disjoint clusters separate in 2D") {
  const auto fixture = testing::two_clusters();
  std::vector<const ClinicalReport*> ptrs;
  for (const auto& r : fixture.reports) ptrs.push_back(&r);
  TsneParams params;
  params.perplexity = 10;
  params.iterations = 500;
  params.seed = 5;
  const auto points = project_reports(ptrs, fixture.embeddings, params);
  REQUIRE(points.size() == 50);
  std::set<std::string> groups;
  for (const auto& p : points) groups.insert(p.group);
  CHECK(groups == std::set<std::string>{"real", "modelo-b"});
  const double s = testing::silhouette(points);
  MESSAGE("silhouette " << s);
  CHECK(s > 0.5);
}

TEST_CASE("scatter export") {
  const std::vector<ProjectedPoint> points{
      {"a", 0.1234567, -2.5, "real"}, {"b", 3.0, 4.0, "m1"}, {"c", -1.0, 0.0, "m1"}};
  const auto text = scatter_tsv(points);
  CHECK(text.rfind("id\tx\ty\tgroup\n", 0) == 0);
  const auto back = parse_scatter(text);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].id == points[i].id);
    CHECK(back[i].group == points[i].group);
    CHECK(std::abs(back[i].x - points[i].x) < 1e-6);
    CHECK(std::abs(back[i].y - points[i].y) < 1e-6);
  }
  const auto svg = scatter_svg(points);
  CHECK(svg.find("<svg") != std::string::npos);

  const auto dir = testing::scratch_dir("scatter");
  export_scatter(points, dir / "p.tsv", dir / "p.svg");
  CHECK(testing::read_file((dir / "p.tsv").string()) == text);
  CHECK(std::filesystem::exists(dir / "p.svg"));
  CHECK_THROWS_AS(export_scatter(std::vector<ProjectedPoint>{}, dir / "e.tsv"), Error);
}
