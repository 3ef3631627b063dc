#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthaudit/config.hpp"
#include "synthaudit/genclient.hpp"

namespace synthaudit {

inline constexpr const char* kToolVersion = "0.1.0";

struct CliContext {
  std::ostream& out;
  std::ostream& err;
  ChatTransport transport = http_chat;
};

// Runs one subcommand; argv[0] is the program name. Returns the exit status.
// Failures print one line: "synthaudit: error[<code>]: <message>".
int run_cli(const std::vector<std::string>& args, const CliContext& context);
int run_cli(int argc, char** argv);

// ISO-8601 UTC; SOURCE_DATE_EPOCH pins it when set.
std::string run_timestamp();

// File-name-safe rendering of a generator id.
std::string sanitize_name(std::string_view name);

struct Manifest {
  std::string command;
  RunConfig config;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

nlohmann::ordered_json manifest_json(const Manifest& manifest);
std::filesystem::path write_manifest(const Manifest& manifest);

// Embedding file names under the embeddings directory for a corpus file.
std::filesystem::path text_embedding_path(const RunConfig& config,
                                          const std::filesystem::path& corpus);
std::filesystem::path token_embedding_path(const RunConfig& config,
                                           const std::filesystem::path& corpus);

}  // namespace synthaudit
