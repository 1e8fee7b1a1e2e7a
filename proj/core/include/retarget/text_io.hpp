#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace retarget {

// Paths ending in ".gz" are read and written gzip-compressed.
bool is_gzip_path(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Splits on '\n'; a trailing empty line is dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace retarget
