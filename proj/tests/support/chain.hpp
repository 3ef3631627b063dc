#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace synthaudit::testing {

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args);

// Runs ingest, generate, embed, evaluate, project and report on the bundled
// toy fixture against a chat endpoint. Stops at the first failing step.
struct ChainResult {
  std::vector<std::pair<std::string, CliRun>> steps;
  bool ok = true;
};
ChainResult run_toy_chain(const std::filesystem::path& out, const std::string& base_url);

// Relative path -> bytes of every regular file under `dir`.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir);

// Scoped environment variable.
class EnvGuard {
 public:
  EnvGuard(std::string name, const std::string& value);
  ~EnvGuard();
  EnvGuard(const EnvGuard&) = delete;
  EnvGuard& operator=(const EnvGuard&) = delete;

 private:
  std::string name_;
  bool had_previous_ = false;
  std::string previous_;
};

}  // namespace synthaudit::testing
