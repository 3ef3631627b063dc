#include "mock_servers.hpp"

#include <algorithm>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <httplib.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthaudit/embed.hpp"

namespace synthaudit::testing {
namespace {

using nlohmann::json;

std::vector<std::string> example_texts(const std::string& prompt) {
  static const std::regex pattern("Diagnostico de ejemplo: ([^\\n]*)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), pattern);
       it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

std::vector<std::string> words_of(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string variant(const std::vector<std::string>& examples, const std::string& code,
                    std::size_t ordinal) {
  if (examples.empty()) return fmt::format("Variante {} sin ejemplos para {}.", ordinal, code);
  const auto& base = examples[(ordinal - 1) % examples.size()];
  if (ordinal == 1) return base;
  auto words = words_of(base);
  // Rotate the word order so every variant differs from its source.
  const std::size_t shift = ordinal % (words.empty() ? 1 : words.size());
  std::rotate(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(shift), words.end());
  std::string text = fmt::format("Variante {} de {}:", ordinal, code);
  for (const auto& w : words) text += " " + w;
  return text;
}

}  // namespace

MockServer::MockServer() : server_(std::make_unique<httplib::Server>()) {}

MockServer::~MockServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("mock server could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string MockServer::base_url() const { return fmt::format("http://127.0.0.1:{}", port_); }

MockLlmServer::MockLlmServer(MockLlmOptions options) : options_(std::move(options)) {
  server().Post("/api/chat", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    const auto body = json::parse(req.body);
    const auto& messages = body.at("messages");
    const auto user = messages.at(1).at("content").get<std::string>();
    static const std::regex code_pattern("correspondan a la etiqueta ([^-\\s]+)-");
    std::smatch match;
    const std::string code = std::regex_search(user, match, code_pattern) ? match[1].str() : "";
    std::size_t attempt = 0;
    {
      std::lock_guard lock(mutex_);
      attempt = per_code_[code]++;
      last_model_ = body.at("model").get<std::string>();
    }
    json reply;
    reply["model"] = body.at("model");
    reply["message"] = {{"role", "assistant"}, {"content", respond(user, options_, attempt)}};
    reply["done"] = true;
    res.set_content(reply.dump(), "application/json");
  });
  start();
}

std::map<std::string, std::size_t> MockLlmServer::requests_per_code() const {
  std::lock_guard lock(mutex_);
  return per_code_;
}

std::string MockLlmServer::last_model() const {
  std::lock_guard lock(mutex_);
  return last_model_;
}

std::string MockLlmServer::respond(const std::string& user_prompt, const MockLlmOptions& options,
                                   std::size_t attempt) {
  static const std::regex n_pattern("exactamente ([0-9]+) diagnosticos");
  static const std::regex code_pattern("correspondan a la etiqueta ([^-\\s]+)-");
  std::smatch match;
  std::size_t n = 1;
  if (std::regex_search(user_prompt, match, n_pattern)) n = std::stoul(match[1].str());
  std::string code = "UNKNOWN";
  if (std::regex_search(user_prompt, match, code_pattern)) code = match[1].str();
  if (options.broken_codes.contains(code) || attempt < options.failures_per_code) {
    return "Lo siento, no puedo completar { esta tarea";
  }
  if (options.override_count > 0) n = options.override_count;

  const auto examples = example_texts(user_prompt);
  nlohmann::ordered_json doc;
  if (options.shape == MockShape::kDiagnosticos) {
    doc["diagnosticos"] = json::array();
    for (std::size_t k = 1; k <= n; ++k) doc["diagnosticos"].push_back(variant(examples, code, k));
  } else {
    for (std::size_t k = 1; k <= n; ++k) {
      doc[fmt::format("caso {}", k)] = {{fmt::format("[{}]", code), variant(examples, code, k)}};
    }
  }
  if (!options.wrap) return doc.dump();
  return "Claro, aqui tienes los casos solicitados:\n```json\n" + doc.dump(2) +
         "\n```\nEspero que sirva.";
}

MockEmbedServer::MockEmbedServer(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  server().Post("/api/embed", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    const auto body = json::parse(req.body);
    json embeddings = json::array();
    auto embed_one = [&](const std::string& text) {
      embeddings.push_back(hash_embed(text, dim_, seed_));
    };
    if (body.at("input").is_string()) {
      embed_one(body["input"].get<std::string>());
    } else {
      for (const auto& item : body.at("input")) embed_one(item.get<std::string>());
    }
    res.set_content(json{{"model", body.at("model")}, {"embeddings", embeddings}}.dump(),
                    "application/json");
  });
  start();
}

}  // namespace synthaudit::testing
