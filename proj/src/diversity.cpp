#include "synthaudit/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "synthaudit/error.hpp"
#include "synthaudit/tsv.hpp"

namespace synthaudit {
namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

std::string join_ngram(std::span<const std::string> tokens, std::size_t start,
                       std::size_t n) {
  std::string out = tokens[start];
  for (std::size_t i = 1; i < n; ++i) {
    out.push_back(' ');
    out += tokens[start + i];
  }
  return out;
}

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[join_ngram(tokens, i, n)];
  }
  return counts;
}

std::size_t ngram_total(std::size_t length, std::size_t n) {
  return length >= n ? length - n + 1 : 0;
}

std::size_t closest_length(std::size_t candidate,
                           std::span<const std::size_t> lengths) {
  std::size_t best = lengths.front();
  for (auto length : lengths) {
    const auto diff = [candidate](std::size_t l) {
      return l > candidate ? l - candidate : candidate - l;
    };
    if (diff(length) < diff(best) || (diff(length) == diff(best) && length < best)) {
      best = length;
    }
  }
  return best;
}

// Combines clipped matches per order into the smoothed geometric mean and
// applies the brevity penalty.
double combine_bleu(std::span<const std::size_t> matches,
                    std::span<const std::size_t> totals,
                    std::size_t candidate_length, std::size_t reference_length) {
  if (candidate_length == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    double precision;
    if (k > 0 && matches[k] == 0) {
      precision = 1.0 / static_cast<double>(totals[k] + 1);
    } else {
      precision = static_cast<double>(matches[k]) / static_cast<double>(totals[k]);
    }
    log_sum += std::log(precision);
  }
  const double geometric = std::exp(log_sum / static_cast<double>(matches.size()));
  const double ratio = static_cast<double>(reference_length) /
                       static_cast<double>(candidate_length);
  const double brevity = ratio > 1.0 ? std::exp(1.0 - ratio) : 1.0;
  return geometric * brevity;
}

std::vector<Tokens> tokenize_corpus(const Corpus& corpus,
                                    const TokenizerConfig& tokenizer) {
  std::vector<Tokens> documents;
  documents.reserve(corpus.size());
  for (const auto& report : corpus.reports()) {
    documents.push_back(tokenize(report.text, tokenizer));
  }
  return documents;
}

}  // namespace

double bleu(std::span<const std::string> candidate,
            std::span<const Tokens> references, std::size_t max_n) {
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "BLEU order must be >= 1");
  if (candidate.empty() || references.empty()) return 0.0;

  std::vector<std::size_t> matches(max_n, 0);
  std::vector<std::size_t> totals(max_n, 0);
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand_counts = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& reference : references) {
      for (const auto& [gram, count] : count_ngrams(reference, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    for (const auto& [gram, count] : cand_counts) {
      const auto it = max_ref.find(gram);
      if (it != max_ref.end()) matches[n - 1] += std::min(count, it->second);
    }
    totals[n - 1] = ngram_total(candidate.size(), n);
  }
  std::vector<std::size_t> lengths;
  for (const auto& reference : references) lengths.push_back(reference.size());
  return combine_bleu(matches, totals, candidate.size(),
                      closest_length(candidate.size(), lengths));
}

double self_bleu(std::span<const Tokens> documents, std::size_t max_n) {
  if (documents.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Self-BLEU needs at least 2 documents");
  }
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "BLEU order must be >= 1");

  // Per order and n-gram: the two largest document counts and the owner of
  // the largest, so the max over "all other documents" is O(1) per lookup.
  struct Top2 {
    std::size_t first = 0;
    std::size_t owner = SIZE_MAX;
    std::size_t second = 0;
  };
  const std::size_t docs = documents.size();
  std::vector<std::vector<NgramCounts>> counts(max_n, std::vector<NgramCounts>(docs));
  std::vector<std::unordered_map<std::string, Top2>> tops(max_n);
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t d = 0; d < docs; ++d) {
      counts[n - 1][d] = count_ngrams(documents[d], n);
      for (const auto& [gram, count] : counts[n - 1][d]) {
        auto& top = tops[n - 1][gram];
        if (count > top.first) {
          top.second = top.first;
          top.first = count;
          top.owner = d;
        } else if (count > top.second) {
          top.second = count;
        }
      }
    }
  }
  std::vector<std::size_t> lengths(docs);
  for (std::size_t d = 0; d < docs; ++d) lengths[d] = documents[d].size();

  double sum = 0.0;
  std::vector<std::size_t> others;
  others.reserve(docs - 1);
  for (std::size_t d = 0; d < docs; ++d) {
    const auto& candidate = documents[d];
    if (candidate.empty()) continue;
    std::vector<std::size_t> matches(max_n, 0);
    std::vector<std::size_t> totals(max_n, 0);
    for (std::size_t n = 1; n <= max_n; ++n) {
      for (const auto& [gram, count] : counts[n - 1][d]) {
        const auto& top = tops[n - 1].at(gram);
        const auto other_max = top.owner == d ? top.second : top.first;
        matches[n - 1] += std::min(count, other_max);
      }
      totals[n - 1] = ngram_total(candidate.size(), n);
    }
    others.clear();
    for (std::size_t o = 0; o < docs; ++o) {
      if (o != d) others.push_back(lengths[o]);
    }
    sum += combine_bleu(matches, totals, candidate.size(),
                        closest_length(candidate.size(), others));
  }
  return sum / static_cast<double>(docs);
}

double self_bleu(const Corpus& corpus, std::size_t max_n,
                 const TokenizerConfig& tokenizer) {
  return self_bleu(tokenize_corpus(corpus, tokenizer), max_n);
}

double ttr(std::span<const Tokens> documents, TtrMode mode) {
  if (documents.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "TTR of an empty corpus");
  }
  std::size_t total_tokens = 0;
  double ratio_sum = 0.0;
  std::size_t non_empty = 0;
  std::set<std::string_view> pooled;
  for (const auto& doc : documents) {
    if (doc.empty()) continue;
    const std::set<std::string_view> types(doc.begin(), doc.end());
    ratio_sum += static_cast<double>(types.size()) / static_cast<double>(doc.size());
    ++non_empty;
    total_tokens += doc.size();
    pooled.insert(types.begin(), types.end());
  }
  if (total_tokens == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "TTR: every document is token-free");
  }
  if (mode == TtrMode::kPerDocMean) {
    return ratio_sum / static_cast<double>(non_empty);
  }
  return static_cast<double>(pooled.size()) / static_cast<double>(total_tokens);
}

double ttr(const Corpus& corpus, TtrMode mode, const TokenizerConfig& tokenizer) {
  return ttr(tokenize_corpus(corpus, tokenizer), mode);
}

std::vector<NgramCount> top_ngrams(std::span<const Tokens> documents,
                                   std::size_t n, std::size_t k) {
  if (n < 1 || k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "top_ngrams needs n >= 1 and k >= 1");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& [gram, count] : count_ngrams(doc, n)) counts[gram] += count;
  }
  std::vector<NgramCount> ranked;
  ranked.reserve(counts.size());
  for (auto& [gram, count] : counts) ranked.push_back({gram, count});
  const auto keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranked.end(), [](const NgramCount& a, const NgramCount& b) {
                      if (a.count != b.count) return a.count > b.count;
                      return a.ngram < b.ngram;
                    });
  ranked.resize(keep);
  return ranked;
}

std::vector<NgramCount> top_ngrams(const Corpus& corpus, std::size_t n,
                                   std::size_t k, const TokenizerConfig& tokenizer) {
  return top_ngrams(tokenize_corpus(corpus, tokenizer), n, k);
}

DiversityScores diversity_scores(const Corpus& corpus,
                                 const DiversityConfig& config,
                                 const TokenizerConfig& tokenizer) {
  const auto documents = tokenize_corpus(corpus, tokenizer);
  DiversityScores scores;
  scores.self_bleu = self_bleu(documents, config.bleu_order);
  scores.ttr = ttr(documents, config.ttr_mode);
  scores.top_ngrams = top_ngrams(documents, config.ngram_order, config.top_k);
  return scores;
}

std::string ngrams_to_tsv(const std::vector<NgramCount>& ngrams) {
  std::string out = "ngram\tcount\n";
  for (const auto& entry : ngrams) {
    out += tsv::join_row({entry.ngram, std::to_string(entry.count)});
    out.push_back('\n');
  }
  return out;
}

}  // namespace synthaudit
