#include "synthaudit/tokenizer.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace synthaudit {
namespace {

bool is_word_char(UChar32 c) {
  if (u_isalpha(c) || u_isdigit(c)) return true;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

void append_utf8(std::string& out, UChar32 c) {
  char buffer[U8_MAX_LENGTH];
  std::int32_t length = 0;
  UBool error = false;
  U8_APPEND(buffer, length, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buffer, static_cast<std::size_t>(length));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t offset = 0;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  while (offset < length) {
    UChar32 c;
    U8_NEXT(bytes, offset, length, c);
    if (c < 0) {
      flush();
      continue;
    }
    if (is_word_char(c)) {
      append_utf8(current, config.lowercase ? u_tolower(c) : c);
      continue;
    }
    flush();
    if (!config.strip_punctuation && !u_isUWhiteSpace(c) && !u_iscntrl(c)) {
      std::string symbol;
      append_utf8(symbol, c);
      tokens.push_back(std::move(symbol));
    }
  }
  flush();
  return tokens;
}

}  // namespace synthaudit
