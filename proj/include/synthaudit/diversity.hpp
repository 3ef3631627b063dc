#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/tokenizer.hpp"

namespace synthaudit {

using Tokens = std::vector<std::string>;

enum class TtrMode { kPerDocMean, kCorpusLevel };

struct NgramCount {
  std::string ngram;  // tokens joined by a single space
  std::size_t count = 0;

  friend bool operator==(const NgramCount&, const NgramCount&) = default;
};

struct DiversityScores {
  double self_bleu = 0.0;
  double ttr = 0.0;
  std::vector<NgramCount> top_ngrams;
};

struct DiversityConfig {
  std::size_t bleu_order = 4;
  TtrMode ttr_mode = TtrMode::kPerDocMean;
  std::size_t ngram_order = 2;
  std::size_t top_k = 20;
};

// Sentence BLEU with uniform weights. Precisions are clipped against the
// per-n-gram maximum over references; the brevity penalty uses the reference
// length closest to the candidate (shorter wins ties). For n >= 2 a zero
// match count is smoothed by adding one to numerator and denominator.
double bleu(std::span<const std::string> candidate,
            std::span<const Tokens> references, std::size_t max_n);

// Mean BLEU of each document against all others.
double self_bleu(std::span<const Tokens> documents, std::size_t max_n);
double self_bleu(const Corpus& corpus, std::size_t max_n,
                 const TokenizerConfig& tokenizer = {});

double ttr(std::span<const Tokens> documents, TtrMode mode);
double ttr(const Corpus& corpus, TtrMode mode,
           const TokenizerConfig& tokenizer = {});

// k most frequent n-grams, count descending then n-gram ascending.
std::vector<NgramCount> top_ngrams(std::span<const Tokens> documents,
                                   std::size_t n, std::size_t k);
std::vector<NgramCount> top_ngrams(const Corpus& corpus, std::size_t n,
                                   std::size_t k,
                                   const TokenizerConfig& tokenizer = {});

DiversityScores diversity_scores(const Corpus& corpus,
                                 const DiversityConfig& config,
                                 const TokenizerConfig& tokenizer = {});

// Two-column TSV (ngram, count) with a header row.
std::string ngrams_to_tsv(const std::vector<NgramCount>& ngrams);

}  // namespace synthaudit
