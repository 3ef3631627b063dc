#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthaudit/corpus.hpp"
#include "synthaudit/promptkit.hpp"

namespace synthaudit {

struct GenerationConfig {
  std::string base_url = "http://127.0.0.1:11434";
  std::string model;
  std::size_t m = 10;
  std::size_t n = 10;
  std::size_t max_retries = 3;
  std::size_t parallelism = 2;
  double request_timeout = 300.0;
  std::uint64_t seed = 0;
  // Sampling parameters forwarded verbatim as the request's "options".
  nlohmann::json options = nlohmann::json::object();

  void validate() const;
};

struct RawGeneration {
  IcdCode code;
  std::string model;
  std::string raw_text;
  std::optional<std::string> extracted_json;
  std::size_t attempt = 0;
};

// Sends one chat request and returns the assistant message content.
// Implementations must be safe to call from several threads.
using ChatTransport = std::function<std::string(const GenerationConfig&,
                                                const PromptBundle&)>;

// POST {base_url}/api/chat with {model, messages, stream: false[, options]}.
std::string http_chat(const GenerationConfig& config,
                      const PromptBundle& bundle);
std::string chat_request_body(const GenerationConfig& config,
                              const PromptBundle& bundle);
std::string parse_chat_response(std::string_view body);

// First "{" through its matching "}", skipping braces inside JSON strings.
std::string extract_json_block(std::string_view raw);

// Accepts {"caso k": {"[codes]": "text"}} and {"diagnosticos": ["text"]}.
std::vector<ClinicalReport> parse_generation(std::string_view json_text,
                                             const IcdCode& code,
                                             std::string_view model);

// Content-addressed id for a synthetic report.
std::string synthetic_report_id(std::string_view model, const IcdCode& code,
                                std::size_t ordinal, std::string_view text);

struct CodeGeneration {
  std::vector<ClinicalReport> reports;
  std::vector<RawGeneration> attempts;
};

CodeGeneration generate_for_code(const GenerationConfig& config,
                                 const PromptTemplateSet& templates,
                                 const Corpus& corpus, const IcdCode& code,
                                 const ChatTransport& transport = http_chat);

struct CodeYield {
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::size_t attempts = 0;
  std::optional<std::string> failure;
};

struct PipelineResult {
  Corpus synthetic;
  std::map<std::string, CodeYield> yields;
};

// Runs generate_for_code for every code of the real corpus with at most
// config.parallelism requests in flight. Codes come from the corpus
// by_code index; `code_names` supplies the names the prompt needs.
PipelineResult run_pipeline(const GenerationConfig& config,
                            const PromptTemplateSet& templates,
                            const Corpus& real_corpus,
                            const std::map<std::string, std::string>& code_names,
                            const ChatTransport& transport = http_chat);

nlohmann::ordered_json yields_to_json(const std::map<std::string, CodeYield>& yields);
std::map<std::string, CodeYield> yields_from_json(const nlohmann::json& doc);

}  // namespace synthaudit
