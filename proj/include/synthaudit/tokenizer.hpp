#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synthaudit {

// Words are maximal runs of Unicode letters, digits and combining marks.
// With strip_punctuation off, every other non-space character becomes a
// one-character token of its own.
struct TokenizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;

  friend bool operator==(const TokenizerConfig&,
                         const TokenizerConfig&) = default;
};

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config = {});

}  // namespace synthaudit
