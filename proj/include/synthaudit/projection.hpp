#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/embed.hpp"
#include "synthaudit/matrix.hpp"

namespace synthaudit {

struct TsneParams {
  double perplexity = 30.0;
  double learning_rate = 200.0;
  std::size_t iterations = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PerplexitySearch {
  double beta = 1.0;
  bool converged = true;
  std::size_t steps = 0;
};

// Binary search for the Gaussian precision whose conditional distribution
// over `squared_distances` has the target perplexity (natural-log entropy,
// tolerance 1e-5, at most 200 steps).
PerplexitySearch perplexity_search(std::span<const double> squared_distances,
                                   double target_perplexity);

// Conditional probabilities p_{j} proportional to exp(-beta * d_j).
std::vector<double> conditional_probabilities(std::span<const double> squared_distances,
                                              double beta);

// Symmetrized joint affinities (P + P^T) / 2N with zero diagonal.
Matrix tsne_affinities(std::span<const Vector> points, double perplexity);

// Student-t similarities q_ij of a 2D layout (N x 2).
Matrix tsne_similarities(const Matrix& layout);

double kl_divergence(const Matrix& p, const Matrix& q);

// Perplexity actually used for N points: min(requested, just below (N-1)/3).
double effective_perplexity(double requested, std::size_t points);

struct TsneResult {
  Matrix layout;  // N x 2
  double initial_kl = 0.0;
  double final_kl = 0.0;
  double perplexity = 0.0;
};

// Exact O(N^2) t-SNE with early exaggeration, momentum and per-coordinate
// gains. Deterministic for a fixed seed.
TsneResult tsne(std::span<const Vector> points, const TsneParams& params);

struct ProjectedPoint {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  // "real" or the generator (model) id of a synthetic report.
  std::string group;
};

std::string group_of(const ClinicalReport& report);

// Projects the pooled text embeddings of all given reports.
std::vector<ProjectedPoint> project_reports(std::span<const ClinicalReport* const> reports,
                                            const EmbeddingSet& embeddings,
                                            const TsneParams& params,
                                            TsneResult* details = nullptr);

// TSV with header "id x y group"; optionally an SVG scatter, one color per
// group.
void export_scatter(std::span<const ProjectedPoint> points,
                    const std::filesystem::path& path,
                    const std::optional<std::filesystem::path>& svg_path = std::nullopt);
std::string scatter_tsv(std::span<const ProjectedPoint> points);
std::string scatter_svg(std::span<const ProjectedPoint> points);
std::vector<ProjectedPoint> parse_scatter(std::string_view tsv_content);

}  // namespace synthaudit
