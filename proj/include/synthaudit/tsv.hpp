#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synthaudit::tsv {

// Tab-separated fields; backslash, tab, CR and LF inside a field are escaped
// as \\, \t, \r and \n.
std::string escape(std::string_view field);
std::string unescape(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);
std::vector<std::string> split_row(std::string_view line);

}  // namespace synthaudit::tsv
