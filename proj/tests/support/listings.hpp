#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace synthaudit::testing {

// Body of the lstlisting titled `title` in a LaTeX-flavoured markdown file,
// with the common leading indentation of its non-blank lines removed and
// whitespace-only lines emptied. Lines are joined with "\n".
inline std::optional<std::string> extract_listing(const std::string& document,
                                                  const std::string& title) {
  std::istringstream in(document);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  const std::string marker = "title={" + title + "}";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find(marker) == std::string::npos) continue;
    std::size_t start = i + 1;
    while (start < lines.size() && lines[start].find_first_not_of(' ') != std::string::npos &&
           lines[start][lines[start].find_first_not_of(' ')] != ']') {
      ++start;
    }
    ++start;
    std::vector<std::string> body;
    for (std::size_t j = start; j < lines.size(); ++j) {
      if (lines[j].find("\\end{lstlisting}") != std::string::npos) break;
      body.push_back(lines[j]);
    }
    std::size_t indent = std::string::npos;
    for (const auto& line : body) {
      const auto first = line.find_first_not_of(' ');
      if (first != std::string::npos) indent = std::min(indent, first);
    }
    std::string out;
    for (std::size_t j = 0; j < body.size(); ++j) {
      if (j > 0) out += "\n";
      const auto& line = body[j];
      if (line.find_first_not_of(' ') == std::string::npos) continue;
      out += line.substr(indent);
    }
    return out;
  }
  return std::nullopt;
}

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace synthaudit::testing
