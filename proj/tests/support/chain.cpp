#include "chain.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "synthaudit/cli.hpp"

namespace synthaudit::testing {

namespace fs = std::filesystem;

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::vector<std::string> argv{"synthaudit"};
  argv.insert(argv.end(), args.begin(), args.end());
  CliRun result;
  result.status = run_cli(argv, CliContext{out, err});
  result.out = out.str();
  result.err = err.str();
  return result;
}

ChainResult run_toy_chain(const fs::path& out, const std::string& base_url) {
  const auto config = (fixture_dir() / "toy_config.json").string();
  const auto real = (out / "real.jsonl").string();
  const auto synthetic = (out / "synthetic_mock-llm.jsonl").string();
  const std::vector<std::string> common{"--config", config, "--out", out.string(), "-q"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail = {}) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const std::vector<std::pair<std::string, std::vector<std::string>>> steps{
      {"ingest", with({"ingest", toy_real_path().string()}, {"--source", "real"})},
      {"generate", with({"generate"}, {"--real", real, "--base-url", base_url})},
      {"embed", with({"embed"}, {"--real", real, "--synthetic", synthetic})},
      {"evaluate", with({"evaluate"}, {"--real", real, "--synthetic", synthetic})},
      {"project", with({"project"}, {"--real", real, "--synthetic", synthetic, "--svg"})},
      {"report", with({"report"})},
  };
  ChainResult result;
  for (const auto& [name, args] : steps) {
    result.steps.emplace_back(name, run(args));
    if (result.steps.back().second.status != 0) {
      result.ok = false;
      break;
    }
  }
  return result;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    files[fs::relative(entry.path(), dir).generic_string()] = buffer.str();
  }
  return files;
}

EnvGuard::EnvGuard(std::string name, const std::string& value) : name_(std::move(name)) {
  if (const char* old = std::getenv(name_.c_str())) {
    had_previous_ = true;
    previous_ = old;
  }
  ::setenv(name_.c_str(), value.c_str(), 1);
}

EnvGuard::~EnvGuard() {
  if (had_previous_) ::setenv(name_.c_str(), previous_.c_str(), 1);
  else ::unsetenv(name_.c_str());
}

}  // namespace synthaudit::testing
