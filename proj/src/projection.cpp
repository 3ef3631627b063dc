#include "synthaudit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "synthaudit/error.hpp"
#include "synthaudit/rng.hpp"
#include "synthaudit/tsv.hpp"

namespace synthaudit {
namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr std::size_t kMaxSearchSteps = 200;
constexpr double kMinGain = 0.01;

// Entropy (nats) of the conditional distribution at precision beta.
// Distances are shifted by their minimum for numerical range.
double entropy_at(std::span<const double> distances, double min_distance,
                  double beta) {
  double sum = 0.0;
  double weighted = 0.0;
  for (double d : distances) {
    const double shifted = d - min_distance;
    const double w = std::exp(-beta * shifted);
    sum += w;
    weighted += shifted * w;
  }
  return std::log(sum) + beta * weighted / sum;
}

Matrix squared_distances(std::span<const Vector> points) {
  const auto n = points.size();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const double diff = points[i][k] - points[j][k];
        sum += diff * diff;
      }
      d(i, j) = sum;
      d(j, i) = sum;
    }
  }
  return d;
}

}  // namespace

void TsneParams::validate() const {
  if (!(perplexity >= 2.0)) throw Error(ErrorCode::kConfig, "perplexity must be >= 2");
  if (iterations < 250) throw Error(ErrorCode::kConfig, "t-SNE needs >= 250 iterations");
  if (!(learning_rate > 0.0) || !(early_exaggeration > 0.0) ||
      !(initial_momentum > 0.0) || !(final_momentum > 0.0)) {
    throw Error(ErrorCode::kConfig, "t-SNE rates must be positive");
  }
}

PerplexitySearch perplexity_search(std::span<const double> squared_distances,
                                   double target_perplexity) {
  if (squared_distances.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "perplexity search needs >= 2 neighbors");
  }
  const double min_d = *std::min_element(squared_distances.begin(), squared_distances.end());
  const double max_d = *std::max_element(squared_distances.begin(), squared_distances.end());
  if (max_d == 0.0) {
    spdlog::warn("perplexity search: all distances are zero, using beta = 1");
    return {1.0, false, 0};
  }

  const double target = std::log(target_perplexity);
  PerplexitySearch result;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double beta = 1.0;
  for (std::size_t step = 1; step <= kMaxSearchSteps; ++step) {
    result.steps = step;
    const double gap = entropy_at(squared_distances, min_d, beta) - target;
    if (std::abs(gap) < kEntropyTolerance) {
      result.beta = beta;
      return result;
    }
    if (gap > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  spdlog::warn("perplexity search did not converge after {} steps", kMaxSearchSteps);
  result.beta = beta;
  result.converged = false;
  return result;
}

std::vector<double> conditional_probabilities(std::span<const double> squared_distances,
                                              double beta) {
  const double min_d = *std::min_element(squared_distances.begin(), squared_distances.end());
  std::vector<double> p(squared_distances.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = std::exp(-beta * (squared_distances[j] - min_d));
    sum += p[j];
  }
  for (auto& v : p) v /= sum;
  return p;
}

double effective_perplexity(double requested, std::size_t points) {
  const double limit = (static_cast<double>(points) - 1.0) / 3.0;
  return requested < limit ? requested : std::nextafter(limit, 0.0);
}

Matrix tsne_affinities(std::span<const Vector> points, double perplexity) {
  const auto n = points.size();
  const auto distances = squared_distances(points);
  Matrix conditional(n, n);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) row[k++] = distances(i, j);
    }
    const auto search = perplexity_search(row, perplexity);
    const auto p = conditional_probabilities(row, search.beta);
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) conditional(i, j) = p[k++];
    }
  }
  Matrix joint(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) joint(i, j) = (conditional(i, j) + conditional(j, i)) * scale;
    }
  }
  return joint;
}

Matrix tsne_similarities(const Matrix& layout) {
  const auto n = layout.rows();
  Matrix q(n, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = layout(i, 0) - layout(j, 0);
      const double dy = layout(i, 1) - layout(j, 1);
      const double num = 1.0 / (1.0 + dx * dx + dy * dy);
      q(i, j) = num;
      q(j, i) = num;
      total += 2.0 * num;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q(i, j) /= total;
  }
  return q;
}

double kl_divergence(const Matrix& p, const Matrix& q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double pij = p(i, j);
      if (pij > 0.0) {
        kl += pij * std::log(pij / std::max(q(i, j), std::numeric_limits<double>::min()));
      }
    }
  }
  return kl;
}

TsneResult tsne(std::span<const Vector> points, const TsneParams& params) {
  params.validate();
  const auto n = points.size();
  if (n < 5) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("t-SNE needs at least 5 points, got {}", n));
  }
  const auto dim = points.front().size();
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "t-SNE needs dim >= 2");
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw Error(ErrorCode::kDimMismatch, "t-SNE input dims differ");
    }
  }

  TsneResult result;
  result.perplexity = effective_perplexity(params.perplexity, n);
  const auto affinities = tsne_affinities(points, result.perplexity);

  Matrix layout(n, 2);
  Rng rng(params.seed);
  for (std::size_t i = 0; i < n; ++i) {
    layout(i, 0) = 1e-4 * rng.normal();
    layout(i, 1) = 1e-4 * rng.normal();
  }
  result.initial_kl = kl_divergence(affinities, tsne_similarities(layout));

  Matrix velocity(n, 2);
  Matrix gains(n, 2, 1.0);
  Matrix gradient(n, 2);
  Matrix numerators(n, n);
  for (std::size_t iter = 0; iter < params.iterations; ++iter) {
    const double exaggeration =
        iter < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum =
        iter < params.momentum_switch ? params.initial_momentum : params.final_momentum;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = layout(i, 0) - layout(j, 0);
        const double dy = layout(i, 1) - layout(j, 1);
        const double num = 1.0 / (1.0 + dx * dx + dy * dy);
        numerators(i, j) = num;
        numerators(j, i) = num;
        total += 2.0 * num;
      }
    }
    double gradient_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double num = numerators(i, j);
        const double force = (exaggeration * affinities(i, j) - num / total) * num;
        gx += force * (layout(i, 0) - layout(j, 0));
        gy += force * (layout(i, 1) - layout(j, 1));
      }
      gradient(i, 0) = 4.0 * gx;
      gradient(i, 1) = 4.0 * gy;
      gradient_norm += gradient(i, 0) * gradient(i, 0) + gradient(i, 1) * gradient(i, 1);
    }
    gradient_norm = std::sqrt(gradient_norm);
    if (!std::isfinite(gradient_norm)) {
      throw Error(ErrorCode::kNumerical,
                  fmt::format("t-SNE diverged at iteration {} (gradient norm {})",
                              iter, gradient_norm));
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < 2; ++k) {
        const bool same_sign = (gradient(i, k) > 0.0) == (velocity(i, k) > 0.0);
        gains(i, k) = std::max(same_sign ? gains(i, k) * 0.8 : gains(i, k) + 0.2, kMinGain);
        velocity(i, k) = momentum * velocity(i, k) -
                         params.learning_rate * gains(i, k) * gradient(i, k);
        layout(i, k) += velocity(i, k);
      }
    }
    for (std::size_t k = 0; k < 2; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += layout(i, k);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) layout(i, k) -= mean;
    }
  }
  for (double v : layout.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNumerical, "t-SNE produced non-finite coordinates");
    }
  }
  result.final_kl = kl_divergence(affinities, tsne_similarities(layout));
  result.layout = std::move(layout);
  return result;
}

std::string group_of(const ClinicalReport& report) {
  if (report.source == Source::kReal) return "real";
  return report.generator.value_or("synthetic");
}

std::vector<ProjectedPoint> project_reports(std::span<const ClinicalReport* const> reports,
                                            const EmbeddingSet& embeddings,
                                            const TsneParams& params,
                                            TsneResult* details) {
  std::vector<Vector> points;
  points.reserve(reports.size());
  for (const auto* report : reports) {
    if (!embeddings.contains(report->id)) {
      throw Error(ErrorCode::kNotFound, "no embedding for id " + report->id);
    }
    points.push_back(embeddings.vector(report->id));
  }
  auto result = tsne(points, params);
  std::vector<ProjectedPoint> out;
  out.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out.push_back({reports[i]->id, result.layout(i, 0), result.layout(i, 1),
                   group_of(*reports[i])});
  }
  if (details != nullptr) *details = std::move(result);
  return out;
}

std::string scatter_tsv(std::span<const ProjectedPoint> points) {
  std::string out = "id\tx\ty\tgroup\n";
  for (const auto& p : points) {
    out += tsv::join_row({p.id, fmt::format("{:.17g}", p.x), fmt::format("{:.17g}", p.y),
                          p.group});
    out.push_back('\n');
  }
  return out;
}

std::string scatter_svg(std::span<const ProjectedPoint> points) {
  static constexpr const char* kPalette[] = {"#1f5fbf", "#2ca02c", "#e6b800", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr double kSize = 600.0;
  constexpr double kMargin = 30.0;
  double min_x = points.front().x, max_x = min_x;
  double min_y = points.front().y, max_y = min_y;
  std::map<std::string, std::size_t> colors;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
    colors.emplace(p.group, 0);
  }
  std::size_t next = 0;
  for (auto& [group, color] : colors) color = next++ % std::size(kPalette);
  const double span_x = std::max(max_x - min_x, 1e-12);
  const double span_y = std::max(max_y - min_y, 1e-12);
  auto sx = [&](double x) { return kMargin + (x - min_x) / span_x * (kSize - 2 * kMargin); };
  auto sy = [&](double y) { return kSize - kMargin - (y - min_y) / span_y * (kSize - 2 * kMargin); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
      "viewBox=\"0 0 {0} {0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kSize + 180);
  for (const auto& p : points) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" "
                       "fill-opacity=\"0.7\"/>\n",
                       sx(p.x), sy(p.y), kPalette[colors.at(p.group)]);
  }
  double legend_y = kMargin;
  for (const auto& [group, color] : colors) {
    std::string label;
    for (char c : group) {
      if (c == '<') label += "&lt;";
      else if (c == '>') label += "&gt;";
      else if (c == '&') label += "&amp;";
      else label.push_back(c);
    }
    out += fmt::format("<circle cx=\"{:.0f}\" cy=\"{:.0f}\" r=\"5\" fill=\"{}\"/>"
                       "<text x=\"{:.0f}\" y=\"{:.0f}\" font-size=\"12\" "
                       "font-family=\"sans-serif\">{}</text>\n",
                       kSize + 10, legend_y, kPalette[color], kSize + 20, legend_y + 4, label);
    legend_y += 18;
  }
  out += "</svg>\n";
  return out;
}

void export_scatter(std::span<const ProjectedPoint> points,
                    const std::filesystem::path& path,
                    const std::optional<std::filesystem::path>& svg_path) {
  if (points.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "export_scatter needs at least one point");
  }
  auto write = [](const std::filesystem::path& target, const std::string& content) {
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + target.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + target.string());
  };
  write(path, scatter_tsv(points));
  if (svg_path) write(*svg_path, scatter_svg(points));
}

std::vector<ProjectedPoint> parse_scatter(std::string_view tsv_content) {
  std::vector<ProjectedPoint> points;
  std::size_t start = 0;
  bool header = true;
  while (start < tsv_content.size()) {
    auto end = tsv_content.find('\n', start);
    if (end == std::string_view::npos) end = tsv_content.size();
    const auto line = tsv_content.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = tsv::split_row(line);
    if (fields.size() != 4) throw Error(ErrorCode::kFormat, "scatter row needs 4 fields");
    try {
      points.push_back({fields[0], std::stod(fields[1]), std::stod(fields[2]), fields[3]});
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, "bad coordinate in scatter row");
    }
  }
  return points;
}

}  // namespace synthaudit
