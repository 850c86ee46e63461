#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace smoothrank::detail {

/// Whole file as bytes; IoError naming the path when it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Lines without their terminators ("\r\n" tolerated).
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to "<path>.tmp" and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

void append_file(const std::filesystem::path& path, std::string_view contents);

/// Fixed-point formatting with the given number of decimals.
std::string fixed(double value, int decimals = 6);

std::vector<std::string> split_whitespace(std::string_view line);

}  // namespace smoothrank::detail
