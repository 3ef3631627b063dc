#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthaudit/diversity.hpp"
#include "synthaudit/embed.hpp"
#include "synthaudit/fidelity.hpp"
#include "synthaudit/genclient.hpp"
#include "synthaudit/privacy.hpp"
#include "synthaudit/projection.hpp"
#include "synthaudit/tokenizer.hpp"

namespace synthaudit {

struct RunPaths {
  std::optional<std::filesystem::path> real;
  std::vector<std::filesystem::path> synthetic;
  // Directory holding *.text.emb.jsonl / *.tokens.emb.jsonl; defaults to out.
  std::optional<std::filesystem::path> embeddings;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> code_names;
  std::optional<std::filesystem::path> templates;
};

struct RunConfig {
  GenerationConfig generation;
  EmbeddingProviderConfig embedding;
  PrivacyConfig privacy;
  KernelParams kernel;
  ReferencePairing pairing;
  TsneParams tsne;
  TokenizerConfig tokenizer;
  DiversityConfig diversity;
  SmsParams sms;
  std::size_t threads = 0;
  RunPaths paths;

  void validate() const;
  std::filesystem::path embeddings_dir() const;
};

// Overrides given on the command line; unset members leave the file value.
struct ConfigOverrides {
  std::optional<std::filesystem::path> real;
  std::vector<std::filesystem::path> synthetic;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::string> base_url;
  std::optional<double> threshold;
  std::optional<std::string> pairing;
  std::optional<std::string> ttr_mode;
};

inline constexpr const char* kBaseUrlEnv = "SYNTHAUDIT_BASE_URL";

// Relative paths inside the document resolve against `base_dir`. Unknown keys
// are rejected.
RunConfig config_from_json(const nlohmann::json& doc,
                           const std::filesystem::path& base_dir = {});
nlohmann::ordered_json config_to_json(const RunConfig& config);

// Precedence: environment > overrides > file > defaults.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const ConfigOverrides& overrides);

// SHA-256 of the canonical JSON form.
std::string config_fingerprint(const RunConfig& config);

ReferencePairing::Strategy parse_pairing(std::string_view text);
std::string_view pairing_name(ReferencePairing::Strategy strategy);
TtrMode parse_ttr_mode(std::string_view text);
std::string_view ttr_mode_name(TtrMode mode);

}  // namespace synthaudit
