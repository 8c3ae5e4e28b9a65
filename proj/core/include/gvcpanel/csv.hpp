#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gvcpanel::io {

// Parsed CSV with per-row source line numbers for error reporting.
// Quoting follows the usual rules (fields with commas/quotes/newlines are
// quoted, embedded quotes doubled). Lines starting with '#' and blank lines
// are skipped.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  // Column index by header name; -1 when absent.
  int column(std::string_view name) const;
};

CsvTable read_csv_text(std::string_view text, std::string source_label);
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_line(const std::vector<std::string>& fields);

// Locale-independent numeric conversions with file:line context on failure.
double parse_double(std::string_view field, const std::string& source, std::size_t line,
                    std::string_view what);
long parse_long(std::string_view field, const std::string& source, std::size_t line,
                std::string_view what);
// Shortest round-trip representation; reruns of an export are byte identical.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gvcpanel::io
