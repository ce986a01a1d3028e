#pragma once

#include <filesystem>
#include <string>

namespace subdiff {

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace subdiff
