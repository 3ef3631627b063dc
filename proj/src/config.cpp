#include "synthaudit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

#include <fmt/format.h>

#include "synthaudit/error.hpp"
#include "synthaudit/hashing.hpp"

namespace synthaudit {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

void check_keys(const json& object, std::string_view section,
                std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) {
    throw Error(ErrorCode::kConfig, fmt::format("section {} must be an object", section));
  }
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (auto name : allowed) known |= name == key;
    if (!known) {
      throw Error(ErrorCode::kConfig, fmt::format("unknown key {}.{}", section, key));
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (object.contains(key)) target = object.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) return base / p;
  return p;
}

void read_path(const json& object, const char* key, const fs::path& base,
               std::optional<fs::path>& target) {
  if (object.contains(key) && !object.at(key).is_null()) {
    target = resolve(base, object.at(key).get<std::string>());
  }
}

std::string_view embedding_kind_name(EmbeddingProviderConfig::Kind kind) {
  switch (kind) {
    case EmbeddingProviderConfig::Kind::kFile: return "file";
    case EmbeddingProviderConfig::Kind::kHash: return "hash";
    case EmbeddingProviderConfig::Kind::kHttp: return "http";
  }
  return "hash";
}

EmbeddingProviderConfig::Kind parse_embedding_kind(std::string_view text) {
  if (text == "file") return EmbeddingProviderConfig::Kind::kFile;
  if (text == "hash") return EmbeddingProviderConfig::Kind::kHash;
  if (text == "http") return EmbeddingProviderConfig::Kind::kHttp;
  throw Error(ErrorCode::kConfig, fmt::format("unknown embedding kind {}", text));
}

std::string_view aggregation_name(ReferencePairing::Aggregation aggregation) {
  return aggregation == ReferencePairing::Aggregation::kMean ? "mean" : "best-match";
}

ReferencePairing::Aggregation parse_aggregation(std::string_view text) {
  if (text == "mean") return ReferencePairing::Aggregation::kMean;
  if (text == "best-match") return ReferencePairing::Aggregation::kBestMatch;
  throw Error(ErrorCode::kConfig, fmt::format("unknown aggregation {}", text));
}

ordered_json optional_path(const std::optional<fs::path>& p) {
  return p ? ordered_json(p->generic_string()) : ordered_json(nullptr);
}

}  // namespace

ReferencePairing::Strategy parse_pairing(std::string_view text) {
  if (text == "same-code") return ReferencePairing::Strategy::kSameCodePool;
  if (text == "few-shot") return ReferencePairing::Strategy::kFewShotExamples;
  if (text == "all") return ReferencePairing::Strategy::kAllReal;
  throw Error(ErrorCode::kConfig,
              fmt::format("unknown pairing {} (same-code|few-shot|all)", text));
}

std::string_view pairing_name(ReferencePairing::Strategy strategy) {
  switch (strategy) {
    case ReferencePairing::Strategy::kSameCodePool: return "same-code";
    case ReferencePairing::Strategy::kFewShotExamples: return "few-shot";
    case ReferencePairing::Strategy::kAllReal: return "all";
  }
  return "same-code";
}

TtrMode parse_ttr_mode(std::string_view text) {
  if (text == "per-doc") return TtrMode::kPerDocMean;
  if (text == "corpus") return TtrMode::kCorpusLevel;
  throw Error(ErrorCode::kConfig, fmt::format("unknown ttr mode {} (per-doc|corpus)", text));
}

std::string_view ttr_mode_name(TtrMode mode) {
  return mode == TtrMode::kCorpusLevel ? "corpus" : "per-doc";
}

void RunConfig::validate() const {
  embedding.validate();
  privacy.validate();
  kernel.validate();
  tsne.validate();
  if (diversity.bleu_order < 1) throw Error(ErrorCode::kConfig, "bleu_order must be >= 1");
  if (diversity.ngram_order < 1) throw Error(ErrorCode::kConfig, "ngram_order must be >= 1");
  if (!(sms.epsilon > 0.0)) throw Error(ErrorCode::kConfig, "sms epsilon must be positive");
  if (!(sms.tol > 0.0)) throw Error(ErrorCode::kConfig, "sms tol must be positive");
  if (sms.max_iter < 1) throw Error(ErrorCode::kConfig, "sms max_iter must be >= 1");
  if (paths.out.empty()) throw Error(ErrorCode::kConfig, "output directory is empty");
}

fs::path RunConfig::embeddings_dir() const {
  return paths.embeddings.value_or(paths.out);
}

RunConfig config_from_json(const json& doc, const fs::path& base_dir) {
  RunConfig config;
  try {
    check_keys(doc, "config",
               {"generation", "embedding", "privacy", "kernel", "pairing", "tsne",
                "tokenizer", "diversity", "sms", "threads", "paths"});
    read(doc, "threads", config.threads);

    if (doc.contains("generation")) {
      const auto& g = doc["generation"];
      check_keys(g, "generation",
                 {"base_url", "model", "m", "n", "max_retries", "parallelism",
                  "request_timeout", "seed", "options"});
      auto& gen = config.generation;
      read(g, "base_url", gen.base_url);
      read(g, "model", gen.model);
      read(g, "m", gen.m);
      read(g, "n", gen.n);
      read(g, "max_retries", gen.max_retries);
      read(g, "parallelism", gen.parallelism);
      read(g, "request_timeout", gen.request_timeout);
      read(g, "seed", gen.seed);
      if (g.contains("options")) gen.options = g["options"];
    }
    if (doc.contains("embedding")) {
      const auto& e = doc["embedding"];
      check_keys(e, "embedding", {"kind", "path", "dim", "seed", "base_url", "model"});
      auto& emb = config.embedding;
      if (e.contains("kind")) emb.kind = parse_embedding_kind(e["kind"].get<std::string>());
      if (e.contains("path")) emb.path = resolve(base_dir, e["path"].get<std::string>());
      read(e, "dim", emb.dim);
      read(e, "seed", emb.seed);
      read(e, "base_url", emb.base_url);
      read(e, "model", emb.model);
    }
    if (doc.contains("privacy")) {
      check_keys(doc["privacy"], "privacy", {"threshold"});
      read(doc["privacy"], "threshold", config.privacy.threshold);
    }
    if (doc.contains("kernel")) {
      const auto& k = doc["kernel"];
      check_keys(k, "kernel", {"bandwidth"});
      if (k.contains("bandwidth") && !k["bandwidth"].is_null()) {
        config.kernel.bandwidth = k["bandwidth"].get<double>();
      }
    }
    if (doc.contains("pairing")) {
      const auto& p = doc["pairing"];
      check_keys(p, "pairing", {"strategy", "aggregation"});
      if (p.contains("strategy")) {
        config.pairing.strategy = parse_pairing(p["strategy"].get<std::string>());
      }
      if (p.contains("aggregation")) {
        config.pairing.aggregation = parse_aggregation(p["aggregation"].get<std::string>());
      }
    }
    if (doc.contains("tsne")) {
      const auto& t = doc["tsne"];
      check_keys(t, "tsne",
                 {"perplexity", "learning_rate", "iterations", "early_exaggeration",
                  "exaggeration_iterations", "initial_momentum", "final_momentum",
                  "momentum_switch", "seed"});
      auto& ts = config.tsne;
      read(t, "perplexity", ts.perplexity);
      read(t, "learning_rate", ts.learning_rate);
      read(t, "iterations", ts.iterations);
      read(t, "early_exaggeration", ts.early_exaggeration);
      read(t, "exaggeration_iterations", ts.exaggeration_iterations);
      read(t, "initial_momentum", ts.initial_momentum);
      read(t, "final_momentum", ts.final_momentum);
      read(t, "momentum_switch", ts.momentum_switch);
      read(t, "seed", ts.seed);
    }
    if (doc.contains("tokenizer")) {
      check_keys(doc["tokenizer"], "tokenizer", {"lowercase", "strip_punctuation"});
      read(doc["tokenizer"], "lowercase", config.tokenizer.lowercase);
      read(doc["tokenizer"], "strip_punctuation", config.tokenizer.strip_punctuation);
    }
    if (doc.contains("diversity")) {
      const auto& d = doc["diversity"];
      check_keys(d, "diversity", {"bleu_order", "ttr_mode", "ngram_order", "top_k"});
      read(d, "bleu_order", config.diversity.bleu_order);
      if (d.contains("ttr_mode")) {
        config.diversity.ttr_mode = parse_ttr_mode(d["ttr_mode"].get<std::string>());
      }
      read(d, "ngram_order", config.diversity.ngram_order);
      read(d, "top_k", config.diversity.top_k);
    }
    if (doc.contains("sms")) {
      check_keys(doc["sms"], "sms", {"epsilon", "tol", "max_iter"});
      read(doc["sms"], "epsilon", config.sms.epsilon);
      read(doc["sms"], "tol", config.sms.tol);
      read(doc["sms"], "max_iter", config.sms.max_iter);
    }
    if (doc.contains("paths")) {
      const auto& p = doc["paths"];
      check_keys(p, "paths",
                 {"real", "synthetic", "embeddings", "out", "code_names", "templates"});
      read_path(p, "real", base_dir, config.paths.real);
      if (p.contains("synthetic")) {
        for (const auto& entry : p["synthetic"]) {
          config.paths.synthetic.push_back(resolve(base_dir, entry.get<std::string>()));
        }
      }
      read_path(p, "embeddings", base_dir, config.paths.embeddings);
      if (p.contains("out")) config.paths.out = resolve(base_dir, p["out"].get<std::string>());
      read_path(p, "code_names", base_dir, config.paths.code_names);
      read_path(p, "templates", base_dir, config.paths.templates);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return config;
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json doc;
  const auto& gen = config.generation;
  doc["generation"] = {{"base_url", gen.base_url},
                       {"model", gen.model},
                       {"m", gen.m},
                       {"n", gen.n},
                       {"max_retries", gen.max_retries},
                       {"parallelism", gen.parallelism},
                       {"request_timeout", gen.request_timeout},
                       {"seed", gen.seed},
                       {"options", ordered_json::parse(gen.options.dump())}};
  const auto& emb = config.embedding;
  doc["embedding"] = {{"kind", embedding_kind_name(emb.kind)},
                      {"path", emb.path.generic_string()},
                      {"dim", emb.dim},
                      {"seed", emb.seed},
                      {"base_url", emb.base_url},
                      {"model", emb.model}};
  doc["privacy"] = {{"threshold", config.privacy.threshold}};
  doc["kernel"] = {{"bandwidth", config.kernel.bandwidth
                                     ? ordered_json(*config.kernel.bandwidth)
                                     : ordered_json(nullptr)}};
  doc["pairing"] = {{"strategy", pairing_name(config.pairing.strategy)},
                    {"aggregation", aggregation_name(config.pairing.aggregation)}};
  const auto& ts = config.tsne;
  doc["tsne"] = {{"perplexity", ts.perplexity},
                 {"learning_rate", ts.learning_rate},
                 {"iterations", ts.iterations},
                 {"early_exaggeration", ts.early_exaggeration},
                 {"exaggeration_iterations", ts.exaggeration_iterations},
                 {"initial_momentum", ts.initial_momentum},
                 {"final_momentum", ts.final_momentum},
                 {"momentum_switch", ts.momentum_switch},
                 {"seed", ts.seed}};
  doc["tokenizer"] = {{"lowercase", config.tokenizer.lowercase},
                      {"strip_punctuation", config.tokenizer.strip_punctuation}};
  doc["diversity"] = {{"bleu_order", config.diversity.bleu_order},
                      {"ttr_mode", ttr_mode_name(config.diversity.ttr_mode)},
                      {"ngram_order", config.diversity.ngram_order},
                      {"top_k", config.diversity.top_k}};
  doc["sms"] = {{"epsilon", config.sms.epsilon},
                {"tol", config.sms.tol},
                {"max_iter", config.sms.max_iter}};
  doc["threads"] = config.threads;
  auto synthetic = ordered_json::array();
  for (const auto& p : config.paths.synthetic) synthetic.push_back(p.generic_string());
  doc["paths"] = {{"real", optional_path(config.paths.real)},
                  {"synthetic", synthetic},
                  {"embeddings", optional_path(config.paths.embeddings)},
                  {"out", config.paths.out.generic_string()},
                  {"code_names", optional_path(config.paths.code_names)},
                  {"templates", optional_path(config.paths.templates)}};
  return doc;
}

RunConfig resolve_config(const std::optional<fs::path>& file,
                         const ConfigOverrides& overrides) {
  RunConfig config;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open config " + file->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfig, file->string() + ": " + e.what());
    }
    try {
      config = config_from_json(doc, file->parent_path());
    } catch (const Error& e) {
      throw Error(e.code(), file->string() + ": " + e.what());
    }
  }

  if (overrides.real) config.paths.real = *overrides.real;
  if (!overrides.synthetic.empty()) config.paths.synthetic = overrides.synthetic;
  if (overrides.out) config.paths.out = *overrides.out;
  if (overrides.seed) {
    config.generation.seed = *overrides.seed;
    config.tsne.seed = *overrides.seed;
  }
  if (overrides.model) config.generation.model = *overrides.model;
  if (overrides.base_url) config.generation.base_url = *overrides.base_url;
  if (overrides.threshold) config.privacy.threshold = *overrides.threshold;
  if (overrides.pairing) config.pairing.strategy = parse_pairing(*overrides.pairing);
  if (overrides.ttr_mode) config.diversity.ttr_mode = parse_ttr_mode(*overrides.ttr_mode);

  if (const char* env = std::getenv(kBaseUrlEnv); env != nullptr && *env != '\0') {
    config.generation.base_url = env;
  }
  return config;
}

std::string config_fingerprint(const RunConfig& config) {
  return sha256_hex(config_to_json(config).dump());
}

}  // namespace synthaudit
