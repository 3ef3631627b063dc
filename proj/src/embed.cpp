#include "synthaudit/embed.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthaudit/error.hpp"
#include "synthaudit/hashing.hpp"
#include "synthaudit/http.hpp"
#include "synthaudit/unicode.hpp"

namespace synthaudit {
namespace {

constexpr double kNormTolerance = 1e-6;

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Vector parse_vector(const nlohmann::json& value) {
  if (!value.is_array()) throw Error(ErrorCode::kFormat, "vector must be an array");
  Vector out;
  out.reserve(value.size());
  for (const auto& component : value) {
    if (!component.is_number()) {
      throw Error(ErrorCode::kFormat, "vector components must be numbers");
    }
    out.push_back(
        static_cast<double>(static_cast<float>(component.get<double>())));
  }
  return out;
}

Vector normalize_loaded(Vector vector) {
  double norm = std::sqrt(dot(vector, vector));
  if (norm == 0.0 || !std::isfinite(norm)) {
    throw Error(ErrorCode::kFormat, "zero or non-finite vector");
  }
  for (auto& x : vector) x /= norm;
  return vector;
}

void append_vector(std::string& out, const Vector& vector) {
  out.push_back('[');
  for (std::size_t i = 0; i < vector.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += fmt::format("{}", static_cast<float>(vector[i]));
  }
  out.push_back(']');
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::size_t dim, Granularity granularity)
    : dim_(dim), granularity_(granularity) {}

void EmbeddingSet::check(const Vector& vector) const {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("vector has dim {}, set has dim {}", vector.size(),
                            dim_));
  }
  const double norm = std::sqrt(dot(vector, vector));
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::kNumerical,
                fmt::format("vector norm {} is not 1", norm));
  }
}

void EmbeddingSet::add(const std::string& id, Vector vector) {
  if (granularity_ != Granularity::kText) {
    throw Error(ErrorCode::kInvalidArgument, "add() on a token-granularity set");
  }
  check(vector);
  std::vector<Vector> entry;
  entry.push_back(std::move(vector));
  if (!entries_.emplace(id, std::move(entry)).second) {
    throw Error(ErrorCode::kDuplicateId, "duplicate embedding id " + id);
  }
}

void EmbeddingSet::add_tokens(const std::string& id,
                              std::vector<Vector> vectors) {
  if (granularity_ != Granularity::kToken) {
    throw Error(ErrorCode::kInvalidArgument,
                "add_tokens() on a text-granularity set");
  }
  if (vectors.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty token list for " + id);
  }
  for (const auto& v : vectors) check(v);
  if (!entries_.emplace(id, std::move(vectors)).second) {
    throw Error(ErrorCode::kDuplicateId, "duplicate embedding id " + id);
  }
}

const Vector& EmbeddingSet::vector(const std::string& id) const {
  return tokens(id).front();
}

const std::vector<Vector>& EmbeddingSet::tokens(const std::string& id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kNotFound, "no embedding for id " + id);
  }
  return it->second;
}

std::vector<std::string> EmbeddingSet::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, vectors] : entries_) out.push_back(id);
  return out;
}

Vector unit_normalize(Vector vector) {
  const double norm = std::sqrt(dot(vector, vector));
  if (norm == 0.0) {
    std::fill(vector.begin(), vector.end(), 0.0);
    if (!vector.empty()) vector[0] = 1.0;
    return vector;
  }
  for (auto& x : vector) x /= norm;
  return vector;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("cosine_distance: dims {} and {}", a.size(),
                            b.size()));
  }
  return std::clamp(1.0 - dot(a, b), 0.0, 2.0);
}

Vector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed,
                  const TokenizerConfig& tokenizer) {
  if (dim < 2) throw Error(ErrorCode::kInvalidArgument, "hash dim must be >= 2");
  Vector out(dim, 0.0);
  for (const auto& token : tokenize(text, tokenizer)) {
    const auto h = seeded_hash64(token, seed);
    const auto bucket = static_cast<std::size_t>((h & 0x7FFFFFFFFFFFFFFFULL) % dim);
    out[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  // Colliding tokens with opposite signs can cancel to zero; unit_normalize
  // maps that (and the token-free case) to e_0.
  return unit_normalize(std::move(out));
}

std::vector<Vector> EmbeddingProvider::embed_reports(
    std::span<const ClinicalReport> reports) const {
  std::vector<std::string> texts;
  texts.reserve(reports.size());
  for (const auto& report : reports) texts.push_back(report.text);
  return embed_texts(texts);
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim,
                                             std::uint64_t seed,
                                             TokenizerConfig tokenizer)
    : dim_(dim), seed_(seed), tokenizer_(tokenizer) {
  if (dim_ < 2) throw Error(ErrorCode::kConfig, "hash dim must be >= 2");
}

std::string HashEmbeddingProvider::describe() const {
  return fmt::format("hash(dim={},seed={})", dim_, seed_);
}

std::vector<Vector> HashEmbeddingProvider::embed_texts(
    std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    out.push_back(hash_embed(text, dim_, seed_, tokenizer_));
  }
  return out;
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::filesystem::path& path)
    : path_(path), set_(load_embeddings(path)) {
  if (set_.granularity() != Granularity::kText) {
    throw Error(ErrorCode::kProvider,
                path.string() + ": file provider needs text-granularity vectors");
  }
}

std::string FileEmbeddingProvider::describe() const {
  return "file(" + path_.string() + ")";
}

std::vector<Vector> FileEmbeddingProvider::embed_texts(
    std::span<const std::string>) const {
  throw Error(ErrorCode::kProvider,
              "file provider " + path_.string() +
                  " cannot embed free text (sentences or tokens); configure a "
                  "hash or http provider");
}

std::vector<Vector> FileEmbeddingProvider::embed_reports(
    std::span<const ClinicalReport> reports) const {
  std::vector<Vector> out;
  out.reserve(reports.size());
  for (const auto& report : reports) {
    if (!set_.contains(report.id)) {
      throw Error(ErrorCode::kProvider, path_.string() +
                                            ": no embedding for id " +
                                            report.id);
    }
    out.push_back(set_.vector(report.id));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url,
                                             std::string model,
                                             std::size_t batch_size,
                                             double timeout_seconds)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      batch_size_(std::max<std::size_t>(batch_size, 1)),
      timeout_seconds_(timeout_seconds) {}

std::string HttpEmbeddingProvider::describe() const {
  return "http(" + base_url_ + ", model=" + model_ + ")";
}

std::vector<Vector> HttpEmbeddingProvider::embed_texts(
    std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto count = std::min(batch_size_, texts.size() - start);
    nlohmann::json request;
    request["model"] = model_;
    request["input"] = nlohmann::json::array();
    for (std::size_t i = 0; i < count; ++i) {
      request["input"].push_back(texts[start + i]);
    }
    const auto body =
        post_json(base_url_, "/api/embed", request.dump(), timeout_seconds_);
    nlohmann::json response;
    try {
      response = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProvider,
                  "embedding response is not JSON: " + std::string(e.what()));
    }
    if (!response.is_object() || !response.contains("embeddings") ||
        !response["embeddings"].is_array() ||
        response["embeddings"].size() != count) {
      throw Error(ErrorCode::kProvider,
                  fmt::format("embedding response must carry {} embeddings",
                              count));
    }
    for (const auto& item : response["embeddings"]) {
      Vector v;
      try {
        v = parse_vector(item);
      } catch (const Error& e) {
        throw Error(ErrorCode::kProvider, e.what());
      }
      {
        std::lock_guard lock(mutex_);
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_ || v.size() < 2) {
          throw Error(ErrorCode::kDimMismatch,
                      fmt::format("{} returned dim {}, expected {}", describe(),
                                  v.size(), dim_));
        }
      }
      out.push_back(unit_normalize(std::move(v)));
    }
  }
  return out;
}

void EmbeddingProviderConfig::validate() const {
  switch (kind) {
    case Kind::kFile:
      if (path.empty()) throw Error(ErrorCode::kConfig, "file provider needs a path");
      break;
    case Kind::kHash:
      if (dim < 2) throw Error(ErrorCode::kConfig, "hash provider dim must be >= 2");
      break;
    case Kind::kHttp:
      if (base_url.empty()) {
        throw Error(ErrorCode::kConfig, "http provider needs base_url");
      }
      if (model.empty()) throw Error(ErrorCode::kConfig, "http provider needs a model");
      break;
  }
}

std::unique_ptr<EmbeddingProvider> make_provider(
    const EmbeddingProviderConfig& config, const TokenizerConfig& tokenizer) {
  config.validate();
  switch (config.kind) {
    case EmbeddingProviderConfig::Kind::kFile:
      return std::make_unique<FileEmbeddingProvider>(config.path);
    case EmbeddingProviderConfig::Kind::kHash:
      return std::make_unique<HashEmbeddingProvider>(config.dim, config.seed,
                                                     tokenizer);
    case EmbeddingProviderConfig::Kind::kHttp:
      return std::make_unique<HttpEmbeddingProvider>(config.base_url,
                                                     config.model);
  }
  throw Error(ErrorCode::kConfig, "unknown provider kind");
}

EmbeddingSet embed_corpus(const EmbeddingProvider& provider,
                          const Corpus& corpus, Granularity granularity,
                          const TokenizerConfig& tokenizer) {
  if (granularity == Granularity::kText) {
    const auto vectors = provider.embed_reports(corpus.reports());
    const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
    EmbeddingSet set(dim, Granularity::kText);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      set.add(corpus.reports()[i].id, vectors[i]);
    }
    return set;
  }

  // Embed each distinct token once; reports then index into the cache.
  std::vector<std::vector<std::string>> streams;
  std::set<std::string> distinct;
  for (const auto& report : corpus.reports()) {
    auto tokens = tokenize(report.text, tokenizer);
    if (tokens.empty()) tokens.push_back(report.text);
    distinct.insert(tokens.begin(), tokens.end());
    streams.push_back(std::move(tokens));
  }
  const std::vector<std::string> vocabulary(distinct.begin(), distinct.end());
  const auto vectors = provider.embed_texts(vocabulary);
  std::map<std::string_view, const Vector*> cache;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    cache.emplace(vocabulary[i], &vectors[i]);
  }
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
  EmbeddingSet set(dim, Granularity::kToken);
  for (std::size_t i = 0; i < streams.size(); ++i) {
    std::vector<Vector> token_vectors;
    token_vectors.reserve(streams[i].size());
    for (const auto& token : streams[i]) token_vectors.push_back(*cache.at(token));
    set.add_tokens(corpus.reports()[i].id, std::move(token_vectors));
  }
  return set;
}

std::string serialize_embeddings(const EmbeddingSet& set) {
  std::string out;
  for (const auto& [id, vectors] : set.entries()) {
    out += "{\"id\":";
    out += nlohmann::json(id).dump();
    if (set.granularity() == Granularity::kText) {
      out += ",\"vector\":";
      append_vector(out, vectors.front());
    } else {
      out += ",\"vectors\":[";
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (i > 0) out.push_back(',');
        append_vector(out, vectors[i]);
      }
      out.push_back(']');
    }
    out += "}\n";
  }
  return out;
}

void save_embeddings(const EmbeddingSet& set,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << serialize_embeddings(set);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

EmbeddingSet parse_embeddings(std::string_view content) {
  std::optional<EmbeddingSet> set;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (trim(line).empty()) continue;
    const auto where = "line " + std::to_string(line_number) + ": ";
    try {
      const auto record = nlohmann::json::parse(line);
      if (!record.is_object() || !record.contains("id") ||
          !record["id"].is_string()) {
        throw Error(ErrorCode::kFormat, "record needs a string id");
      }
      const auto id = record["id"].get<std::string>();
      if (record.contains("vector")) {
        auto v = normalize_loaded(parse_vector(record["vector"]));
        if (!set) set.emplace(v.size(), Granularity::kText);
        if (set->granularity() != Granularity::kText) {
          throw Error(ErrorCode::kFormat, "mixed text and token records");
        }
        set->add(id, std::move(v));
      } else if (record.contains("vectors") && record["vectors"].is_array()) {
        std::vector<Vector> vectors;
        for (const auto& item : record["vectors"]) {
          vectors.push_back(normalize_loaded(parse_vector(item)));
        }
        if (vectors.empty()) throw Error(ErrorCode::kFormat, "empty token list");
        if (!set) set.emplace(vectors.front().size(), Granularity::kToken);
        if (set->granularity() != Granularity::kToken) {
          throw Error(ErrorCode::kFormat, "mixed text and token records");
        }
        set->add_tokens(id, std::move(vectors));
      } else {
        throw Error(ErrorCode::kFormat, "record needs vector or vectors");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, where + "malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  if (!set) return EmbeddingSet(0, Granularity::kText);
  return std::move(*set);
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open embeddings " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_embeddings(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace synthaudit
