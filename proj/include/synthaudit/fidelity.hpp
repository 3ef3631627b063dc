#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/embed.hpp"
#include "synthaudit/matrix.hpp"
#include "synthaudit/tokenizer.hpp"

namespace synthaudit {

// RBF bandwidth sigma; nullopt selects the median heuristic.
struct KernelParams {
  std::optional<double> bandwidth;

  void validate() const;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic mean, 0 when both are 0.
double harmonic_f1(double precision, double recall);

// Median pairwise Euclidean distance over the pooled points divided by
// sqrt(2); 1 when the median is 0. Pools larger than `max_points` use a
// seeded subsample.
double median_bandwidth(std::span<const Vector> points,
                        std::size_t max_points = 4000);

// Biased (V-statistic) MMD with k(x,y) = exp(-|x-y|^2 / (2 sigma^2)).
double mmd(std::span<const Vector> real, std::span<const Vector> synthetic,
           const KernelParams& params);
double mmd(const EmbeddingSet& real, const EmbeddingSet& synthetic,
           const KernelParams& params);

// Greedy cosine matching over unit token vectors, no IDF weighting.
PrecisionRecall bertscore(std::span<const Vector> candidate_tokens,
                          std::span<const Vector> reference_tokens);

struct TransportPlan {
  Matrix plan;
  double cost = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Entropic optimal transport by log-domain Sinkhorn scaling. Converged when
// the L1 marginal residual drops below `tol`.
TransportPlan solve_ot(const Matrix& cost, std::span<const double> weights_a,
                       std::span<const double> weights_b, double epsilon,
                       double tol, std::size_t max_iter);

// Sentences split on . ; ? ! and newline, empty pieces dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Sentence embeddings and token-count weights of one document.
struct SentenceDocument {
  std::vector<Vector> embeddings;
  std::vector<double> weights;
};

SentenceDocument prepare_sentences(std::string_view text,
                                   const EmbeddingProvider& provider,
                                   const TokenizerConfig& tokenizer = {});

struct SmsParams {
  double epsilon = 0.01;
  double tol = 1e-9;
  std::size_t max_iter = 10000;
};

double sentence_movers_distance(const SentenceDocument& a,
                                const SentenceDocument& b,
                                const SmsParams& params = {});
double sentence_movers_distance(std::string_view doc_a, std::string_view doc_b,
                                const EmbeddingProvider& provider,
                                const TokenizerConfig& tokenizer = {},
                                const SmsParams& params = {});

PrecisionRecall rouge_n(std::span<const std::string> candidate,
                        std::span<const std::string> reference, std::size_t n);
PrecisionRecall rouge_l(std::span<const std::string> candidate,
                        std::span<const std::string> reference);

// Exact-match METEOR: Fmean = 10PR/(R+9P), penalty = 0.5 (chunks/matches)^3.
double meteor(std::span<const std::string> candidate,
              std::span<const std::string> reference);

// Maximum-match alignment with the fewest chunks. `node_budget` bounds the
// branch-and-bound search; the best alignment found so far is used when it
// runs out.
struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  bool exhaustive = true;
};
MeteorAlignment meteor_align(std::span<const std::string> candidate,
                             std::span<const std::string> reference,
                             std::size_t node_budget = 200000);

struct ReferencePairing {
  enum class Strategy { kSameCodePool, kFewShotExamples, kAllReal };
  enum class Aggregation { kBestMatch, kMean };

  Strategy strategy = Strategy::kSameCodePool;
  Aggregation aggregation = Aggregation::kBestMatch;
};

struct FidelityScores {
  double mmd = 0.0;
  double bertscore_p = 0.0;
  double bertscore_r = 0.0;
  double bertscore_f1 = 0.0;
  double sms = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double meteor = 0.0;
};

// Pairwise scores of one synthetic report against one reference.
struct PairScores {
  PrecisionRecall bertscore;
  double sms = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double meteor = 0.0;
};

struct FidelityInputs {
  const Corpus& synthetic;
  const Corpus& real;
  const EmbeddingSet& synthetic_text;
  const EmbeddingSet& real_text;
  const EmbeddingSet& synthetic_tokens;
  const EmbeddingSet& real_tokens;
  // Embeds the sentences for SMS; must accept free text.
  const EmbeddingProvider& sentence_provider;
};

struct FidelityConfig {
  ReferencePairing pairing;
  KernelParams kernel;
  TokenizerConfig tokenizer;
  SmsParams sms;
  // Few-shot draw parameters, used by Strategy::kFewShotExamples.
  std::size_t few_shot_m = 10;
  std::uint64_t few_shot_seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

// Reference ids of the pool a synthetic report is scored against.
std::vector<std::string> reference_pool(const ClinicalReport& synthetic,
                                        const Corpus& real,
                                        const FidelityConfig& config);

FidelityScores corpus_fidelity(const FidelityInputs& inputs,
                               const FidelityConfig& config);

}  // namespace synthaudit
