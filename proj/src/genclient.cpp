#include "synthaudit/genclient.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <variant>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "synthaudit/error.hpp"
#include "synthaudit/hashing.hpp"
#include "synthaudit/http.hpp"
#include "synthaudit/unicode.hpp"

namespace synthaudit {
namespace {

using nlohmann::ordered_json;

void add_diagnosis(std::vector<ClinicalReport>& out, const ordered_json& value,
                   const IcdCode& code, std::string_view model) {
  if (!value.is_string()) {
    throw Error(ErrorCode::kParse, "diagnosis must be a string, got " +
                                       std::string(value.type_name()));
  }
  auto text = value.get<std::string>();
  if (trim(text).empty()) {
    throw Error(ErrorCode::kParse, "empty diagnosis text");
  }
  ClinicalReport report;
  report.id = synthetic_report_id(model, code, out.size() + 1, text);
  report.text = std::move(text);
  report.codes = {IcdCode(code.code())};
  report.source = Source::kSynthetic;
  report.generator = std::string(model);
  out.push_back(std::move(report));
}

}  // namespace

void GenerationConfig::validate() const {
  if (model.empty()) throw Error(ErrorCode::kConfig, "generation model is empty");
  if (base_url.empty()) throw Error(ErrorCode::kConfig, "generation base_url is empty");
  if (m < 1) throw Error(ErrorCode::kConfig, "m must be >= 1");
  if (n < 1) throw Error(ErrorCode::kConfig, "n must be >= 1");
  if (parallelism < 1) throw Error(ErrorCode::kConfig, "parallelism must be >= 1");
  if (!(request_timeout > 0.0)) {
    throw Error(ErrorCode::kConfig, "request_timeout must be positive");
  }
  if (!options.is_object()) {
    throw Error(ErrorCode::kConfig, "generation options must be an object");
  }
}

std::string chat_request_body(const GenerationConfig& config,
                              const PromptBundle& bundle) {
  ordered_json body;
  body["model"] = config.model;
  body["messages"] = ordered_json::array(
      {ordered_json{{"role", "system"}, {"content", bundle.system}},
       ordered_json{{"role", "user"}, {"content", bundle.user}}});
  body["stream"] = false;
  if (!config.options.empty()) body["options"] = config.options;
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kEndpoint,
                "chat response is not JSON: " + std::string(e.what()));
  }
  if (!response.is_object() || !response.contains("message") ||
      !response["message"].is_object() ||
      !response["message"].contains("content") ||
      !response["message"]["content"].is_string()) {
    throw Error(ErrorCode::kEndpoint,
                "chat response lacks a string message.content");
  }
  return response["message"]["content"].get<std::string>();
}

std::string http_chat(const GenerationConfig& config,
                      const PromptBundle& bundle) {
  const auto body = post_json(config.base_url, "/api/chat",
                              chat_request_body(config, bundle),
                              config.request_timeout);
  return parse_chat_response(body);
}

std::string extract_json_block(std::string_view raw) {
  const auto open = raw.find('{');
  if (open == std::string_view::npos) {
    throw Error(ErrorCode::kExtraction, "no opening brace");
  }
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::string(raw.substr(open, i - open + 1));
    }
  }
  throw Error(ErrorCode::kExtraction, "unbalanced braces");
}

std::string synthetic_report_id(std::string_view model, const IcdCode& code,
                                std::size_t ordinal, std::string_view text) {
  std::string key;
  key.append(model).push_back('\x1f');
  key.append(code.code()).push_back('\x1f');
  key.append(std::to_string(ordinal)).push_back('\x1f');
  key.append(text);
  return "syn-" + sha256_hex(key).substr(0, 20);
}

std::vector<ClinicalReport> parse_generation(std::string_view json_text,
                                             const IcdCode& code,
                                             std::string_view model) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kParse, "malformed object: " + std::string(e.what()));
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "malformed object: top level is not an object");
  }

  std::vector<ClinicalReport> out;
  const auto list = doc.find("diagnosticos");
  if (list != doc.end() && list->is_array()) {
    for (const auto& item : *list) add_diagnosis(out, item, code, model);
  } else {
    for (const auto& [key, value] : doc.items()) {
      if (value.is_object()) {
        for (const auto& [codes, text] : value.items()) {
          add_diagnosis(out, text, code, model);
        }
      } else {
        add_diagnosis(out, value, code, model);
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::kParse, "zero diagnoses");
  return out;
}

CodeGeneration generate_for_code(const GenerationConfig& config,
                                 const PromptTemplateSet& templates,
                                 const Corpus& corpus, const IcdCode& code,
                                 const ChatTransport& transport) {
  config.validate();
  const auto bundle =
      build_prompt(templates, corpus, code, config.m, config.n, config.seed);

  CodeGeneration result;
  std::optional<Error> last_error;
  for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
    RawGeneration raw{code, config.model, {}, std::nullopt, attempt};
    try {
      raw.raw_text = transport(config, bundle);
      raw.extracted_json = extract_json_block(raw.raw_text);
      auto reports = parse_generation(*raw.extracted_json, code, config.model);
      if (reports.size() > config.n) reports.resize(config.n);
      result.attempts.push_back(std::move(raw));
      result.reports = std::move(reports);
      return result;
    } catch (const Error& e) {
      spdlog::debug("{} attempt {} for {} failed: {}", config.model,
                    attempt + 1, code.code(), e.what());
      last_error = e;
      result.attempts.push_back(std::move(raw));
    }
  }
  throw Error(last_error->code(),
              fmt::format("{}: all {} attempts failed for {}; last error: {}",
                          config.model, config.max_retries + 1, code.code(),
                          last_error->what()));
}

PipelineResult run_pipeline(const GenerationConfig& config,
                            const PromptTemplateSet& templates,
                            const Corpus& real_corpus,
                            const std::map<std::string, std::string>& code_names,
                            const ChatTransport& transport) {
  if (real_corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "run_pipeline needs a non-empty real corpus");
  }
  config.validate();
  templates.validate();

  std::vector<IcdCode> codes;
  for (const auto& code : real_corpus.codes()) {
    codes.push_back(named_code(code, code_names));
  }

  using Outcome = std::variant<CodeGeneration, std::string>;
  std::vector<Outcome> outcomes(codes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < codes.size(); i = next.fetch_add(1)) {
      try {
        outcomes[i] =
            generate_for_code(config, templates, real_corpus, codes[i], transport);
      } catch (const std::exception& e) {
        outcomes[i] = std::string(e.what());
      }
    }
  };
  const auto workers = std::min(config.parallelism, codes.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }

  PipelineResult result;
  std::vector<ClinicalReport> reports;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    auto& yield = result.yields[codes[i].code()];
    yield.requested = config.n;
    if (auto* failure = std::get_if<std::string>(&outcomes[i])) {
      ++failures;
      yield.attempts = config.max_retries + 1;
      yield.failure = *failure;
      spdlog::warn("skipping code {}: {}", codes[i].code(), *failure);
      continue;
    }
    auto& generation = std::get<CodeGeneration>(outcomes[i]);
    yield.produced = generation.reports.size();
    yield.attempts = generation.attempts.size();
    for (auto& report : generation.reports) reports.push_back(std::move(report));
  }
  if (failures == codes.size()) {
    throw Error(ErrorCode::kEndpoint,
                fmt::format("generation failed for all {} codes", codes.size()));
  }
  result.synthetic = Corpus(std::move(reports));
  return result;
}

nlohmann::ordered_json yields_to_json(
    const std::map<std::string, CodeYield>& yields) {
  auto doc = ordered_json::object();
  for (const auto& [code, yield] : yields) {
    ordered_json entry;
    entry["requested"] = yield.requested;
    entry["produced"] = yield.produced;
    entry["attempts"] = yield.attempts;
    entry["failure"] = yield.failure ? ordered_json(*yield.failure) : ordered_json();
    doc[code] = std::move(entry);
  }
  return doc;
}

std::map<std::string, CodeYield> yields_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kFormat, "yield log must be an object");
  std::map<std::string, CodeYield> yields;
  try {
    for (const auto& [code, entry] : doc.items()) {
      CodeYield yield;
      yield.requested = entry.at("requested").get<std::size_t>();
      yield.produced = entry.at("produced").get<std::size_t>();
      yield.attempts = entry.at("attempts").get<std::size_t>();
      if (entry.contains("failure") && entry["failure"].is_string()) {
        yield.failure = entry["failure"].get<std::string>();
      }
      yields[code] = std::move(yield);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "yield log: " + std::string(e.what()));
  }
  return yields;
}

}  // namespace synthaudit
