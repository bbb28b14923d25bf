#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mshedge {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);

/// Parses a double from the whole of `text`; throws InputError otherwise.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// Splits on `sep` without quoting rules (none of our files quote fields).
std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Joins numbers with commas using format_double.
std::string join_doubles(std::span<const double> xs);

/// 64-bit FNV-1a; used for config hashes.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t h);

/// Reads a whole file; throws DependencyError if missing.
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file and renames, so readers never see a
/// half-written artifact.
void write_file(const std::filesystem::path& path, std::string_view content);

/// A parsed CSV: header columns plus rows of raw fields. Lines starting
/// with '#' are metadata; `comments` keeps them without the leading '#'.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row
  std::vector<std::string> comments;

  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source_name);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mshedge
