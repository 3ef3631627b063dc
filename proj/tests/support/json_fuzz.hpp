#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "synthaudit/rng.hpp"

namespace synthaudit::testing {

// Random string drawn from an alphabet rich in braces, quotes and escapes.
inline std::string fuzz_string(Rng& rng) {
  static const char* pieces[] = {"a", "b", " ", "{", "}", "}{", "\"", "\\", ":",
                                 ",", "[", "]", "\n", "\t", "ñ", "é", "0"};
  constexpr std::uint64_t kPieces = sizeof(pieces) / sizeof(pieces[0]);
  std::string out;
  const auto len = rng.below(12);
  for (std::uint64_t i = 0; i < len; ++i) out += pieces[rng.below(kPieces)];
  return out;
}

// Random JSON object nested up to `depth` levels.
inline nlohmann::ordered_json fuzz_object(Rng& rng, int depth) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  const auto fields = 1 + rng.below(4);
  for (std::uint64_t i = 0; i < fields; ++i) {
    const auto key = fuzz_string(rng) + std::to_string(i);
    const auto kind = rng.below(depth > 0 ? 5 : 3);
    if (kind == 0) {
      obj[key] = fuzz_string(rng);
    } else if (kind == 1) {
      obj[key] = static_cast<std::int64_t>(rng.below(1000));
    } else if (kind == 2) {
      obj[key] = nlohmann::ordered_json::array({fuzz_string(rng), nullptr, true});
    } else {
      obj[key] = fuzz_object(rng, depth - 1);
    }
  }
  return obj;
}

// Chatter without braces placed around a JSON block.
inline std::string fuzz_chatter(Rng& rng) {
  static const char* pieces[] = {"Claro! ", "```json\n", "\n```", "Aqui tienes: ",
                                 "texto \"citado\" ", "] ) ( [ ", "\n\n", "fin."};
  std::string out;
  const auto n = rng.below(4);
  for (std::uint64_t i = 0; i < n; ++i) out += pieces[rng.below(8)];
  return out;
}

}  // namespace synthaudit::testing
