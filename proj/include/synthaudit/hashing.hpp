#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace synthaudit {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Seeded 64-bit hash (FNV-1a over seed and bytes, finished with splitmix64).
std::uint64_t seeded_hash64(std::string_view data, std::uint64_t seed);

}  // namespace synthaudit
