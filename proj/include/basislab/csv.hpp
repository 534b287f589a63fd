#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace basislab::csv {

// Comma-separated table with a header row. Fields in this project never
// contain commas or quotes, so no quoting rules apply.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by header name; throws ValidationError when missing.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

Table read_file(const std::filesystem::path& path);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);
double parse_double(std::string_view field, const char* context);
long long parse_int(std::string_view field, const char* context);

// Writes lines to `path` via a temp file + rename, so readers never observe
// a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Convenience row builder: joins fields with commas and appends '\n'.
std::string join_row(const std::vector<std::string>& fields);

}  // namespace basislab::csv
