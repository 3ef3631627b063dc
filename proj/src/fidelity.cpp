#include "synthaudit/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "synthaudit/error.hpp"
#include "synthaudit/parallel.hpp"
#include "synthaudit/rng.hpp"
#include "synthaudit/unicode.hpp"

namespace synthaudit {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void check_dims(std::span<const Vector> points, std::size_t dim,
                std::string_view what) {
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw Error(ErrorCode::kDimMismatch,
                  fmt::format("{}: vector dim {} != {}", what, p.size(), dim));
    }
  }
}

// Kernel values are accumulated in fixed point (2^-62 resolution) so block
// sums are exact and independent of summation order; equal multisets of
// kernel values give bitwise-equal means.
class KernelSum {
 public:
  static constexpr double kScale = 0x1.0p62;

  void add(double value) {
    total_ += static_cast<__int128>(std::llround(value * kScale));
  }
  double mean(double count) const {
    return static_cast<double>(total_) / kScale / count;
  }

 private:
  __int128 total_ = 0;
};

double kernel_block_mean(std::span<const Vector> a, std::span<const Vector> b,
                         double gamma) {
  KernelSum sum;
  for (const auto& x : a) {
    for (const auto& y : b) sum.add(std::exp(-gamma * squared_distance(x, y)));
  }
  return sum.mean(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double log_sum_exp(std::span<const double> values) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : values) max = std::max(max, v);
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

void check_simplex(std::span<const double> weights, std::string_view name) {
  if (weights.empty()) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{} is empty", name));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{} has a negative or non-finite entry", name));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} sums to {}, not 1", name, sum));
  }
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

class MeteorSearch {
 public:
  MeteorSearch(std::span<const std::string> candidate,
               std::span<const std::string> reference, std::size_t budget)
      : budget_(budget) {
    std::unordered_map<std::string_view, int> ids;
    auto id_of = [&ids](std::string_view word) {
      return ids.emplace(word, static_cast<int>(ids.size())).first->second;
    };
    for (const auto& w : reference) ref_.push_back(id_of(w));
    for (const auto& w : candidate) cand_.push_back(id_of(w));
    const auto vocab = ids.size();
    positions_.resize(vocab);
    for (std::size_t j = 0; j < ref_.size(); ++j) positions_[ref_[j]].push_back(j);
    need_.assign(vocab, 0);
    remaining_.assign(vocab, 0);
    std::vector<std::size_t> cand_count(vocab, 0);
    for (int w : cand_) ++cand_count[w];
    for (std::size_t w = 0; w < vocab; ++w) {
      need_[w] = std::min(cand_count[w], positions_[w].size());
      remaining_[w] = cand_count[w];
      matches_ += need_[w];
    }
    used_.assign(ref_.size(), false);
  }

  MeteorAlignment run() {
    if (matches_ > 0) search(0, -1, 0);
    return {matches_, matches_ == 0 ? 0 : best_, !exhausted_};
  }

 private:
  void search(std::size_t i, long prev_ref, std::size_t chunks) {
    if (chunks >= best_) return;
    if (i == cand_.size()) {
      best_ = chunks;
      return;
    }
    if (++nodes_ > budget_ && best_ != kUnset) {
      exhausted_ = true;
      return;
    }
    const int w = cand_[i];
    --remaining_[w];
    if (need_[w] > 0) {
      --need_[w];
      const auto next = static_cast<std::size_t>(prev_ref + 1);
      if (prev_ref >= 0 && next < ref_.size() && ref_[next] == w && !used_[next]) {
        used_[next] = true;
        search(i + 1, static_cast<long>(next), chunks);
        used_[next] = false;
      }
      for (auto j : positions_[w]) {
        if (used_[j] || (prev_ref >= 0 && j == next)) continue;
        if (chunks + 1 >= best_ || exhausted_) break;
        used_[j] = true;
        search(i + 1, static_cast<long>(j), chunks + 1);
        used_[j] = false;
      }
      ++need_[w];
    }
    // Leaving this position unmatched is allowed only when later
    // occurrences can still supply every match this word needs.
    if (remaining_[w] >= need_[w] && !exhausted_) search(i + 1, -1, chunks);
    ++remaining_[w];
  }

  static constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

  std::vector<int> cand_;
  std::vector<int> ref_;
  std::vector<std::vector<std::size_t>> positions_;
  std::vector<std::size_t> need_;
  std::vector<std::size_t> remaining_;
  std::vector<bool> used_;
  std::size_t matches_ = 0;
  std::size_t best_ = kUnset;
  std::size_t nodes_ = 0;
  std::size_t budget_;
  bool exhausted_ = false;
};

// Tokens, sentence embeddings and token vectors of one prepared document.
struct PreparedDoc {
  std::vector<std::string> tokens;
  SentenceDocument sentences;
  const std::vector<Vector>* token_vectors = nullptr;
};

std::vector<SentenceDocument> prepare_sentence_batch(
    const std::vector<std::string_view>& texts, const EmbeddingProvider& provider,
    const TokenizerConfig& tokenizer) {
  std::vector<std::vector<std::string>> split(texts.size());
  std::set<std::string> distinct;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    split[i] = split_sentences(texts[i]);
    if (split[i].empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "document has zero sentences: \"" + std::string(texts[i]) + "\"");
    }
    distinct.insert(split[i].begin(), split[i].end());
  }
  const std::vector<std::string> unique(distinct.begin(), distinct.end());
  const auto vectors = provider.embed_texts(unique);
  std::map<std::string_view, const Vector*> lookup;
  for (std::size_t i = 0; i < unique.size(); ++i) lookup.emplace(unique[i], &vectors[i]);

  std::vector<SentenceDocument> docs(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::vector<double> counts;
    double total = 0.0;
    for (const auto& sentence : split[i]) {
      counts.push_back(static_cast<double>(tokenize(sentence, tokenizer).size()));
      total += counts.back();
    }
    auto& doc = docs[i];
    for (std::size_t s = 0; s < split[i].size(); ++s) {
      if (total > 0.0 && counts[s] == 0.0) continue;
      doc.embeddings.push_back(*lookup.at(split[i][s]));
      doc.weights.push_back(total > 0.0 ? counts[s] : 1.0);
    }
    const double norm = total > 0.0 ? total : static_cast<double>(doc.weights.size());
    for (auto& w : doc.weights) w /= norm;
  }
  return docs;
}

PairScores score_pair(const PreparedDoc& synthetic, const PreparedDoc& reference,
                      const SmsParams& sms) {
  PairScores scores;
  scores.bertscore = bertscore(*synthetic.token_vectors, *reference.token_vectors);
  scores.sms = sentence_movers_distance(synthetic.sentences, reference.sentences, sms);
  scores.rouge1 = rouge_n(synthetic.tokens, reference.tokens, 1).f1;
  scores.rouge2 = rouge_n(synthetic.tokens, reference.tokens, 2).f1;
  scores.rougeL = rouge_l(synthetic.tokens, reference.tokens).f1;
  scores.meteor = meteor(synthetic.tokens, reference.tokens);
  return scores;
}

PairScores aggregate(const std::vector<PairScores>& pairs,
                     ReferencePairing::Aggregation aggregation) {
  PairScores out;
  if (aggregation == ReferencePairing::Aggregation::kMean) {
    for (const auto& p : pairs) {
      out.bertscore.precision += p.bertscore.precision;
      out.bertscore.recall += p.bertscore.recall;
      out.bertscore.f1 += p.bertscore.f1;
      out.sms += p.sms;
      out.rouge1 += p.rouge1;
      out.rouge2 += p.rouge2;
      out.rougeL += p.rougeL;
      out.meteor += p.meteor;
    }
    const auto n = static_cast<double>(pairs.size());
    out.bertscore.precision /= n;
    out.bertscore.recall /= n;
    out.bertscore.f1 /= n;
    out.sms /= n;
    out.rouge1 /= n;
    out.rouge2 /= n;
    out.rougeL /= n;
    out.meteor /= n;
    return out;
  }
  out = pairs.front();
  for (const auto& p : pairs) {
    if (p.bertscore.f1 > out.bertscore.f1) out.bertscore = p.bertscore;
    out.sms = std::min(out.sms, p.sms);
    out.rouge1 = std::max(out.rouge1, p.rouge1);
    out.rouge2 = std::max(out.rouge2, p.rouge2);
    out.rougeL = std::max(out.rougeL, p.rougeL);
    out.meteor = std::max(out.meteor, p.meteor);
  }
  return out;
}

std::vector<Vector> corpus_vectors(const Corpus& corpus, const EmbeddingSet& set,
                                   std::string_view what) {
  std::vector<Vector> out;
  out.reserve(corpus.size());
  for (const auto& report : corpus.reports()) {
    if (!set.contains(report.id)) {
      throw Error(ErrorCode::kNotFound,
                  fmt::format("{} embeddings lack id {}", what, report.id));
    }
    out.push_back(set.vector(report.id));
  }
  return out;
}

}  // namespace

void KernelParams::validate() const {
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw Error(ErrorCode::kConfig, "kernel bandwidth must be positive");
  }
}

double harmonic_f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

double median_bandwidth(std::span<const Vector> points, std::size_t max_points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "median_bandwidth needs >= 2 points");
  }
  std::vector<const Vector*> sample;
  for (const auto& p : points) sample.push_back(&p);
  if (max_points >= 2 && sample.size() > max_points) {
    Rng rng(0);
    for (std::size_t i = 0; i < max_points; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(sample.size() - i));
      std::swap(sample[i], sample[j]);
    }
    sample.resize(max_points);
  }
  std::vector<double> distances;
  distances.reserve(sample.size() * (sample.size() - 1) / 2);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = i + 1; j < sample.size(); ++j) {
      distances.push_back(std::sqrt(squared_distance(*sample[i], *sample[j])));
    }
  }
  const auto mid = distances.size() / 2;
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid),
                   distances.end());
  double median = distances[mid];
  if (distances.size() % 2 == 0) {
    const double lower = *std::max_element(
        distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (median == 0.0) return 1.0;
  return median / std::sqrt(2.0);
}

double mmd(std::span<const Vector> real, std::span<const Vector> synthetic,
           const KernelParams& params) {
  if (real.empty() || synthetic.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mmd needs two non-empty samples");
  }
  params.validate();
  const auto dim = real.front().size();
  check_dims(real, dim, "mmd real");
  check_dims(synthetic, dim, "mmd synthetic");

  double sigma;
  if (params.bandwidth) {
    sigma = *params.bandwidth;
  } else {
    std::vector<Vector> pooled(real.begin(), real.end());
    pooled.insert(pooled.end(), synthetic.begin(), synthetic.end());
    sigma = median_bandwidth(pooled);
  }
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  const double kxx = kernel_block_mean(real, real, gamma);
  const double kyy = kernel_block_mean(synthetic, synthetic, gamma);
  const double kxy = kernel_block_mean(real, synthetic, gamma);
  const double squared = kxx + kyy - 2.0 * kxy;
  return std::sqrt(std::max(squared, 0.0));
}

double mmd(const EmbeddingSet& real, const EmbeddingSet& synthetic,
           const KernelParams& params) {
  if (real.dim() != synthetic.dim() && !real.empty() && !synthetic.empty()) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("mmd: real dim {} != synthetic dim {}", real.dim(),
                            synthetic.dim()));
  }
  std::vector<Vector> x, y;
  for (const auto& [id, vectors] : real.entries()) x.push_back(vectors.front());
  for (const auto& [id, vectors] : synthetic.entries()) y.push_back(vectors.front());
  return mmd(x, y, params);
}

PrecisionRecall bertscore(std::span<const Vector> candidate_tokens,
                          std::span<const Vector> reference_tokens) {
  if (candidate_tokens.empty() || reference_tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bertscore needs non-empty token lists");
  }
  const auto dim = candidate_tokens.front().size();
  check_dims(candidate_tokens, dim, "bertscore candidate");
  check_dims(reference_tokens, dim, "bertscore reference");

  Matrix similarity(candidate_tokens.size(), reference_tokens.size());
  for (std::size_t i = 0; i < candidate_tokens.size(); ++i) {
    for (std::size_t j = 0; j < reference_tokens.size(); ++j) {
      similarity(i, j) = dot(candidate_tokens[i], reference_tokens[j]);
    }
  }
  double precision = 0.0;
  for (std::size_t i = 0; i < similarity.rows(); ++i) {
    const auto row = similarity.row(i);
    precision += *std::max_element(row.begin(), row.end());
  }
  double recall = 0.0;
  for (std::size_t j = 0; j < similarity.cols(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < similarity.rows(); ++i) {
      best = std::max(best, similarity(i, j));
    }
    recall += best;
  }
  // Signed hash or model vectors can yield negative similarities; scores are
  // reported on [0, 1].
  precision = std::clamp(precision / static_cast<double>(similarity.rows()), 0.0, 1.0);
  recall = std::clamp(recall / static_cast<double>(similarity.cols()), 0.0, 1.0);
  return {precision, recall, harmonic_f1(precision, recall)};
}

namespace {

// Column potentials g; row potentials follow exactly from g.
struct DualState {
  std::vector<double> g;
  std::vector<double> row_lse;  // log-sum-exp over j of (g_j - C_ij) / eps
  double residual = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

void refresh_rows(DualState& state, const Matrix& cost, double epsilon) {
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  std::vector<double> scratch(cols);
  state.row_lse.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) scratch[j] = (state.g[j] - cost(i, j)) / epsilon;
    state.row_lse[i] = log_sum_exp(scratch);
  }
}

double plan_entry(const DualState& state, const Matrix& cost, std::span<const double> weights_a,
                  std::size_t i, std::size_t j, double epsilon) {
  if (weights_a[i] == 0.0 || !std::isfinite(state.g[j])) return 0.0;
  return weights_a[i] * std::exp((state.g[j] - cost(i, j)) / epsilon - state.row_lse[i]);
}

// Column sums of the plan minus weights_b; returns the L1 norm.
double column_gap(const DualState& state, const Matrix& cost, std::span<const double> weights_a,
                  std::span<const double> weights_b, double epsilon, std::vector<double>& gap) {
  gap.assign(cost.cols(), 0.0);
  for (std::size_t j = 0; j < cost.cols(); ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < cost.rows(); ++i) {
      column += plan_entry(state, cost, weights_a, i, j, epsilon);
    }
    gap[j] = weights_b[j] - column;
  }
  double l1 = 0.0;
  for (double v : gap) l1 += std::abs(v);
  return l1;
}

DualState sinkhorn_dual(const Matrix& cost, std::span<const double> weights_a,
                        std::span<const double> weights_b, double epsilon, double tol,
                        std::size_t max_iter) {
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  std::vector<double> f(rows, 0.0), scratch(std::max(rows, cols)), gap;
  DualState state;
  state.g.assign(cols, 0.0);
  while (state.iterations < max_iter) {
    ++state.iterations;
    for (std::size_t j = 0; j < cols; ++j) {
      if (weights_b[j] == 0.0) {
        state.g[j] = -std::numeric_limits<double>::infinity();
        continue;
      }
      for (std::size_t i = 0; i < rows; ++i) scratch[i] = (f[i] - cost(i, j)) / epsilon;
      state.g[j] = epsilon * (std::log(weights_b[j]) - log_sum_exp({scratch.data(), rows}));
    }
    refresh_rows(state, cost, epsilon);
    for (std::size_t i = 0; i < rows; ++i) f[i] = epsilon * (std::log(weights_a[i]) - state.row_lse[i]);
    // Rows are exact after the f update; the column marginals carry the error.
    state.residual = column_gap(state, cost, weights_a, weights_b, epsilon, gap);
    if (state.residual < tol) break;
  }
  return state;
}

// Semi-dual objective sum_j b_j g_j - eps sum_i a_i row_lse_i (up to a constant).
double semi_dual(const DualState& state, std::span<const double> weights_a,
                 std::span<const double> weights_b, double epsilon) {
  double value = 0.0;
  for (std::size_t j = 0; j < state.g.size(); ++j) {
    if (weights_b[j] > 0.0) value += weights_b[j] * state.g[j];
  }
  for (std::size_t i = 0; i < state.row_lse.size(); ++i) {
    if (weights_a[i] > 0.0) value -= epsilon * weights_a[i] * state.row_lse[i];
  }
  return value;
}

// Damped Newton ascent on the semi-dual at one regularization level, warm
// started from `state`. Steps are capped at 10 eps per coordinate.
void newton_stage(DualState& state, const Matrix& cost, std::span<const double> weights_a,
                  std::span<const double> weights_b, double epsilon, double tol,
                  std::size_t max_steps) {
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  std::vector<double> gap;
  refresh_rows(state, cost, epsilon);
  double value = semi_dual(state, weights_a, weights_b, epsilon);
  state.residual = column_gap(state, cost, weights_a, weights_b, epsilon, gap);
  for (std::size_t step = 0; step < max_steps && !(state.residual < tol); ++step) {
    ++state.iterations;
    Eigen::MatrixXd plan(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        plan(i, j) = plan_entry(state, cost, weights_a, i, j, epsilon);
      }
    }
    // Negative Hessian: (diag(colsum) - P^T diag(1/a) P) / eps, plus a rank-one
    // term that pins the constant shift of g.
    Eigen::VectorXd inv_a(rows);
    for (std::size_t i = 0; i < rows; ++i) inv_a(i) = weights_a[i] > 0.0 ? 1.0 / weights_a[i] : 0.0;
    Eigen::MatrixXd hessian = -(plan.transpose() * inv_a.asDiagonal() * plan);
    hessian.diagonal() += plan.colwise().sum().transpose();
    hessian /= epsilon;
    hessian.array() += 1.0 / (static_cast<double>(cols) * epsilon);
    for (std::size_t j = 0; j < cols; ++j) {
      if (weights_b[j] > 0.0) continue;
      hessian.row(j).setZero();
      hessian.col(j).setZero();
      hessian(j, j) = 1.0;
      gap[j] = 0.0;
    }
    Eigen::VectorXd gradient = Eigen::Map<const Eigen::VectorXd>(gap.data(), cols);
    Eigen::VectorXd direction = hessian.ldlt().solve(gradient);
    if (!direction.allFinite()) break;
    const double largest = direction.cwiseAbs().maxCoeff();
    if (largest > 10.0 * epsilon) direction *= 10.0 * epsilon / largest;
    const double slope = gradient.dot(direction);

    DualState trial = state;
    std::vector<double> trial_gap;
    double t = 1.0;
    for (;;) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (weights_b[j] > 0.0) trial.g[j] = state.g[j] + t * direction(j);
      }
      refresh_rows(trial, cost, epsilon);
      const double trial_value = semi_dual(trial, weights_a, weights_b, epsilon);
      trial.residual = column_gap(trial, cost, weights_a, weights_b, epsilon, trial_gap);
      // Near the optimum the objective gain drops below double resolution, so
      // a drop in the marginal gap also counts as progress.
      if (trial_value >= value + 1e-4 * t * slope ||
          trial.residual < (1.0 - 1e-4 * t) * state.residual || t < 1e-10) {
        value = trial_value;
        break;
      }
      t *= 0.5;
    }
    trial.iterations = state.iterations;
    state = std::move(trial);
    gap = std::move(trial_gap);
  }
}

// Fallback for slowly converging Sinkhorn runs: Newton on the semi-dual with
// the regularization annealed from 1 down to `epsilon`.
DualState newton_dual(const Matrix& cost, std::span<const double> weights_a,
                      std::span<const double> weights_b, double epsilon, double tol) {
  DualState state;
  state.g.assign(cost.cols(), 0.0);
  for (std::size_t j = 0; j < cost.cols(); ++j) {
    if (weights_b[j] == 0.0) state.g[j] = -std::numeric_limits<double>::infinity();
  }
  double level = std::max(1.0, epsilon);
  for (;;) {
    const bool last = level <= epsilon;
    newton_stage(state, cost, weights_a, weights_b, last ? epsilon : level,
                 last ? tol : std::max(tol, 1e-6), last ? 200 : 50);
    if (last) break;
    level = std::max(level * 0.5, epsilon);
  }
  return state;
}

}  // namespace

TransportPlan solve_ot(const Matrix& cost, std::span<const double> weights_a,
                       std::span<const double> weights_b, double epsilon,
                       double tol, std::size_t max_iter) {
  if (cost.rows() != weights_a.size() || cost.cols() != weights_b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("cost is {}x{} but weights are {} and {}", cost.rows(),
                            cost.cols(), weights_a.size(), weights_b.size()));
  }
  check_simplex(weights_a, "weights_a");
  check_simplex(weights_b, "weights_b");
  for (double c : cost.data()) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::kInvalidArgument, "cost entries must be finite and >= 0");
    }
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be > 0");

  const auto rows = cost.rows();
  const auto cols = cost.cols();
  TransportPlan result;
  result.plan = Matrix(rows, cols);

  // A single support point on either side forces the plan a * b^T.
  if (rows == 1 || cols == 1) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        result.plan(i, j) = weights_a[i] * weights_b[j];
        result.cost += result.plan(i, j) * cost(i, j);
      }
    }
    return result;
  }

  const auto dual = sinkhorn_dual(cost, weights_a, weights_b, epsilon, tol, max_iter);
  auto solved = dual;
  if (!(dual.residual < tol)) {
    solved = newton_dual(cost, weights_a, weights_b, epsilon, tol);
    solved.iterations += dual.iterations;
  }
  result.iterations = solved.iterations;
  result.residual = solved.residual;
  if (!(solved.residual < tol)) {
    throw Error(ErrorCode::kConvergence,
                fmt::format("Sinkhorn did not converge in {} iterations (residual {:.3e})",
                            max_iter, std::min(dual.residual, solved.residual)));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double p = plan_entry(solved, cost, weights_a, i, j, epsilon);
      result.plan(i, j) = p;
      result.cost += p * cost(i, j);
    }
  }
  return result;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && std::string_view(".;?!\n").find(text[i]) == std::string_view::npos) {
      continue;
    }
    const auto piece = trim(text.substr(start, i - start));
    if (!piece.empty()) sentences.emplace_back(piece);
    start = i + 1;
  }
  return sentences;
}

SentenceDocument prepare_sentences(std::string_view text,
                                   const EmbeddingProvider& provider,
                                   const TokenizerConfig& tokenizer) {
  return std::move(prepare_sentence_batch({text}, provider, tokenizer).front());
}

double sentence_movers_distance(const SentenceDocument& a,
                                const SentenceDocument& b,
                                const SmsParams& params) {
  if (a.embeddings.empty() || b.embeddings.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "document has zero sentences");
  }
  Matrix cost(a.embeddings.size(), b.embeddings.size());
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      cost(i, j) = cosine_distance(a.embeddings[i], b.embeddings[j]);
    }
  }
  return solve_ot(cost, a.weights, b.weights, params.epsilon, params.tol,
                  params.max_iter)
      .cost;
}

double sentence_movers_distance(std::string_view doc_a, std::string_view doc_b,
                                const EmbeddingProvider& provider,
                                const TokenizerConfig& tokenizer,
                                const SmsParams& params) {
  const auto docs = prepare_sentence_batch({doc_a, doc_b}, provider, tokenizer);
  return sentence_movers_distance(docs[0], docs[1], params);
}

PrecisionRecall rouge_n(std::span<const std::string> candidate,
                        std::span<const std::string> reference, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "ROUGE-N order must be >= 1");
  if (candidate.size() < n || reference.size() < n) return {};
  auto grams = [n](std::span<const std::string> tokens) {
    std::map<std::vector<std::string_view>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                         tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
      ++counts[std::move(gram)];
    }
    return counts;
  };
  const auto cand = grams(candidate);
  const auto ref = grams(reference);
  std::size_t match = 0;
  for (const auto& [gram, count] : cand) {
    const auto it = ref.find(gram);
    if (it != ref.end()) match += std::min(count, it->second);
  }
  const double precision =
      static_cast<double>(match) / static_cast<double>(candidate.size() - n + 1);
  const double recall =
      static_cast<double>(match) / static_cast<double>(reference.size() - n + 1);
  return {precision, recall, harmonic_f1(precision, recall)};
}

PrecisionRecall rouge_l(std::span<const std::string> candidate,
                        std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  const double precision = lcs / static_cast<double>(candidate.size());
  const double recall = lcs / static_cast<double>(reference.size());
  return {precision, recall, harmonic_f1(precision, recall)};
}

MeteorAlignment meteor_align(std::span<const std::string> candidate,
                             std::span<const std::string> reference,
                             std::size_t node_budget) {
  return MeteorSearch(candidate, reference, node_budget).run();
}

double meteor(std::span<const std::string> candidate,
              std::span<const std::string> reference) {
  const auto alignment = meteor_align(candidate, reference);
  if (alignment.matches == 0) return 0.0;
  const auto matches = static_cast<double>(alignment.matches);
  const double precision = matches / static_cast<double>(candidate.size());
  const double recall = matches / static_cast<double>(reference.size());
  const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double fragmentation = static_cast<double>(alignment.chunks) / matches;
  const double penalty = 0.5 * fragmentation * fragmentation * fragmentation;
  return fmean * (1.0 - penalty);
}

std::vector<std::string> reference_pool(const ClinicalReport& synthetic,
                                        const Corpus& real,
                                        const FidelityConfig& config) {
  using Strategy = ReferencePairing::Strategy;
  auto all_real = [&real] {
    std::vector<std::string> ids;
    for (const auto& report : real.reports()) ids.push_back(report.id);
    return ids;
  };
  if (config.pairing.strategy == Strategy::kAllReal) return all_real();

  std::set<std::string> pool;
  for (const auto& code : synthetic.codes) {
    if (!real.by_code().contains(code.code())) {
      spdlog::warn("synthetic report {}: code {} has no real reports, "
                   "falling back to the whole real corpus",
                   synthetic.id, code.code());
      return all_real();
    }
    if (config.pairing.strategy == Strategy::kSameCodePool) {
      const auto& ids = real.by_code().at(code.code());
      pool.insert(ids.begin(), ids.end());
    } else {
      for (const auto& example :
           sample_examples(real, code, config.few_shot_m, config.few_shot_seed)) {
        pool.insert(example.id);
      }
    }
  }
  return {pool.begin(), pool.end()};
}

FidelityScores corpus_fidelity(const FidelityInputs& inputs,
                               const FidelityConfig& config) {
  if (inputs.synthetic.empty() || inputs.real.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus_fidelity needs non-empty corpora");
  }
  if (!inputs.sentence_provider.embeds_free_text()) {
    throw Error(ErrorCode::kProvider,
                inputs.sentence_provider.describe() +
                    " cannot embed sentences for SMS; use a hash or http provider");
  }

  FidelityScores scores;
  scores.mmd = mmd(corpus_vectors(inputs.real, inputs.real_text, "real text"),
                   corpus_vectors(inputs.synthetic, inputs.synthetic_text,
                                  "synthetic text"),
                   config.kernel);

  const auto& synthetic_reports = inputs.synthetic.reports();
  std::vector<std::vector<std::string>> pools;
  std::set<std::string> needed_real;
  for (const auto& report : synthetic_reports) {
    pools.push_back(reference_pool(report, inputs.real, config));
    needed_real.insert(pools.back().begin(), pools.back().end());
  }

  auto prepare = [&](const std::vector<const ClinicalReport*>& reports,
                     const EmbeddingSet& token_set) {
    std::vector<std::string_view> texts;
    for (const auto* r : reports) texts.push_back(r->text);
    auto sentences =
        prepare_sentence_batch(texts, inputs.sentence_provider, config.tokenizer);
    std::vector<PreparedDoc> docs(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
      docs[i].tokens = tokenize(reports[i]->text, config.tokenizer);
      docs[i].sentences = std::move(sentences[i]);
      docs[i].token_vectors = &token_set.tokens(reports[i]->id);
    }
    return docs;
  };

  std::vector<const ClinicalReport*> synthetic_ptrs;
  for (const auto& r : synthetic_reports) synthetic_ptrs.push_back(&r);
  std::vector<const ClinicalReport*> real_ptrs;
  std::map<std::string, std::size_t> real_slot;
  for (const auto& id : needed_real) {
    real_slot[id] = real_ptrs.size();
    real_ptrs.push_back(&inputs.real.at(id));
  }
  const auto synthetic_docs = prepare(synthetic_ptrs, inputs.synthetic_tokens);
  const auto real_docs = prepare(real_ptrs, inputs.real_tokens);

  std::vector<PairScores> per_report(synthetic_reports.size());
  parallel_for(synthetic_reports.size(),
               config.threads == 0 ? default_threads() : config.threads,
               [&](std::size_t s) {
                 std::vector<PairScores> pairs;
                 pairs.reserve(pools[s].size());
                 for (const auto& id : pools[s]) {
                   pairs.push_back(score_pair(synthetic_docs[s],
                                              real_docs[real_slot.at(id)],
                                              config.sms));
                 }
                 per_report[s] = aggregate(pairs, config.pairing.aggregation);
               });

  // Sum in report-id order so the mean does not depend on corpus order.
  std::vector<std::size_t> order(synthetic_reports.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return synthetic_reports[a].id < synthetic_reports[b].id;
  });
  for (auto s : order) {
    const auto& p = per_report[s];
    scores.bertscore_p += p.bertscore.precision;
    scores.bertscore_r += p.bertscore.recall;
    scores.bertscore_f1 += p.bertscore.f1;
    scores.sms += p.sms;
    scores.rouge1 += p.rouge1;
    scores.rouge2 += p.rouge2;
    scores.rougeL += p.rougeL;
    scores.meteor += p.meteor;
  }
  const auto count = static_cast<double>(synthetic_reports.size());
  scores.bertscore_p /= count;
  scores.bertscore_r /= count;
  scores.bertscore_f1 /= count;
  scores.sms /= count;
  scores.rouge1 /= count;
  scores.rouge2 /= count;
  scores.rougeL /= count;
  scores.meteor /= count;
  return scores;
}

}  // namespace synthaudit
