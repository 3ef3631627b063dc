#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "synthaudit/corpus.hpp"

namespace synthaudit::testing {

struct SyntheticFixture {
  Corpus corpus;
  std::map<std::string, std::string> code_names;
};

// `codes` placeholder codes (X00..) with `per_code` real reports each.
SyntheticFixture make_fixture(std::size_t codes, std::size_t per_code);

std::filesystem::path source_dir();
std::filesystem::path fixture_dir();
std::filesystem::path toy_real_path();
std::filesystem::path toy_code_names_path();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace synthaudit::testing
