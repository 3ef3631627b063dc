#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "synthaudit/corpus.hpp"

namespace synthaudit {

// The four prompt segments. Defaults are the Spanish few-shot prompts
// (ASCII, unaccented). Placeholders: example_prompt takes {code},
// {code_name} and {example}; end_prompt takes {n}, {code} and {code_name}.
struct PromptTemplateSet {
  std::string system_prompt;
  std::string start_prompt;
  std::string example_prompt;
  std::string end_prompt;

  static PromptTemplateSet defaults();

  // Throws when a template names a placeholder its segment cannot fill.
  void validate() const;

  friend bool operator==(const PromptTemplateSet&,
                         const PromptTemplateSet&) = default;
};

// JSON override file; absent fields keep their defaults.
PromptTemplateSet load_templates(const std::filesystem::path& path);

struct PromptBundle {
  std::string system;
  std::string user;
  IcdCode code;
  std::size_t n = 0;
};

std::string render_system_prompt(const PromptTemplateSet& templates);

std::string render_user_prompt(const PromptTemplateSet& templates,
                               const IcdCode& code,
                               std::span<const ClinicalReport> examples,
                               std::size_t n);

PromptBundle build_prompt(const PromptTemplateSet& templates,
                          const Corpus& corpus, const IcdCode& code,
                          std::size_t m, std::size_t n, std::uint64_t seed);

}  // namespace synthaudit
