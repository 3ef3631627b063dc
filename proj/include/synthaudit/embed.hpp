#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/tokenizer.hpp"

namespace synthaudit {

using Vector = std::vector<double>;

enum class Granularity { kText, kToken };

// Unit-norm vectors keyed by report id. Text sets hold one vector per id,
// token sets an ordered list of per-token vectors.
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t dim, Granularity granularity);

  std::size_t dim() const { return dim_; }
  Granularity granularity() const { return granularity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(const std::string& id) const { return entries_.contains(id); }

  // Vectors must have length dim and unit norm (1 +- 1e-6).
  void add(const std::string& id, Vector vector);
  void add_tokens(const std::string& id, std::vector<Vector> vectors);

  const Vector& vector(const std::string& id) const;
  const std::vector<Vector>& tokens(const std::string& id) const;

  // Ids in ascending order.
  std::vector<std::string> ids() const;
  const std::map<std::string, std::vector<Vector>>& entries() const {
    return entries_;
  }

 private:
  void check(const Vector& vector) const;

  std::size_t dim_;
  Granularity granularity_;
  std::map<std::string, std::vector<Vector>> entries_;
};

// Scales to unit L2 norm. The zero vector maps to e_0.
Vector unit_normalize(Vector vector);

// 1 - dot(a, b) for unit vectors, clamped to [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

// Feature-hashed bag of tokens, L2-normalized; token-free text maps to e_0.
Vector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed,
                  const TokenizerConfig& tokenizer = {});

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string describe() const = 0;

  // Embeds free text. Returned vectors are unit-norm.
  virtual std::vector<Vector> embed_texts(
      std::span<const std::string> texts) const = 0;

  // Whole-report vectors; defaults to embedding the report text.
  virtual std::vector<Vector> embed_reports(
      std::span<const ClinicalReport> reports) const;

  // False for providers that only know precomputed report vectors.
  virtual bool embeds_free_text() const { return true; }
};

class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  HashEmbeddingProvider(std::size_t dim, std::uint64_t seed,
                        TokenizerConfig tokenizer = {});

  std::string describe() const override;
  std::vector<Vector> embed_texts(
      std::span<const std::string> texts) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  TokenizerConfig tokenizer_;
};

// Serves precomputed Text vectors by report id.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(const std::filesystem::path& path);

  std::string describe() const override;
  std::vector<Vector> embed_texts(
      std::span<const std::string> texts) const override;
  std::vector<Vector> embed_reports(
      std::span<const ClinicalReport> reports) const override;
  bool embeds_free_text() const override { return false; }

 private:
  std::filesystem::path path_;
  EmbeddingSet set_;
};

// POST {base_url}/api/embed {model, input: [...]} -> {embeddings: [[...]]}.
// The dimensionality is whatever the server reports and must stay constant.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string base_url, std::string model,
                        std::size_t batch_size = 64,
                        double timeout_seconds = 120.0);

  std::string describe() const override;
  std::vector<Vector> embed_texts(
      std::span<const std::string> texts) const override;

 private:
  std::string base_url_;
  std::string model_;
  std::size_t batch_size_;
  double timeout_seconds_;
  mutable std::mutex mutex_;
  mutable std::size_t dim_ = 0;
};

struct EmbeddingProviderConfig {
  enum class Kind { kFile, kHash, kHttp };

  Kind kind = Kind::kHash;
  std::filesystem::path path;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::string base_url;
  std::string model = "all-MiniLM-L6-v2";

  void validate() const;
};

std::unique_ptr<EmbeddingProvider> make_provider(
    const EmbeddingProviderConfig& config,
    const TokenizerConfig& tokenizer = {});

// Token sets embed every token string independently through the provider;
// a report without tokens gets the embedding of its raw text.
EmbeddingSet embed_corpus(const EmbeddingProvider& provider,
                          const Corpus& corpus, Granularity granularity,
                          const TokenizerConfig& tokenizer = {});

// Line-delimited {"id": ..., "vector": [...]} records (token sets use
// "vectors": [[...]]). Components are written at float32 precision.
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
std::string serialize_embeddings(const EmbeddingSet& set);
EmbeddingSet load_embeddings(const std::filesystem::path& path);
EmbeddingSet parse_embeddings(std::string_view content);

}  // namespace synthaudit
