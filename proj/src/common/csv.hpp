#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace contoursel::csv {

// Minimal reader for the toolkit's own flat CSV files (no quoting).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line per row

  std::size_t column(std::string_view name) const;  // throws parse error
};

std::vector<std::string> split_line(std::string_view line);

Table read(const std::filesystem::path& path);
Table parse(std::istream& in, const std::string& source_name);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

double parse_double(const std::string& field, const std::string& where);
std::int64_t parse_int(const std::string& field, const std::string& where);

void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace contoursel::csv
