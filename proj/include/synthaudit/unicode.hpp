#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace synthaudit {

// True when `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

// Number of Unicode scalar values. Assumes valid UTF-8.
std::size_t count_scalars(std::string_view text);

// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view text);

}  // namespace synthaudit
