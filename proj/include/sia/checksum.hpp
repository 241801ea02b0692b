#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace sia {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents, or nullopt if it cannot be read.
std::optional<std::string> sha256_file(const std::filesystem::path& path);

/// `bytes` random bytes from the OS CSPRNG, hex encoded.
std::string random_hex(std::size_t bytes);

}  // namespace sia
