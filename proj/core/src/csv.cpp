#include "gvcpanel/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gvcpanel/error.hpp"

namespace gvcpanel::io {

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

// Splits one logical CSV record starting at pos; advances pos past the
// record. Handles quoted fields spanning newlines.
std::vector<std::string> parse_record(std::string_view text, std::size_t& pos,
                                      std::size_t& line, const std::string& source) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        if (c == '\n') ++line;
        cur.push_back(c);
        ++pos;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        ++pos;
        break;
      case ',':
        fields.push_back(std::move(cur));
        cur.clear();
        ++pos;
        break;
      case '\r':
        ++pos;
        break;
      case '\n':
        ++pos;
        ++line;
        fields.push_back(std::move(cur));
        return fields;
      default:
        cur.push_back(c);
        ++pos;
    }
  }
  if (in_quotes)
    throw Error("[csv] " + source + ":" + std::to_string(start_line) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

CsvTable read_csv_text(std::string_view text, std::string source_label) {
  CsvTable table;
  table.source = std::move(source_label);
  std::size_t pos = 0, line = 1;
  bool have_header = false;
  while (pos < text.size()) {
    // skip blank and comment lines
    if (text[pos] == '\n') {
      ++pos;
      ++line;
      continue;
    }
    if (text[pos] == '\r') {
      ++pos;
      continue;
    }
    if (text[pos] == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
      continue;
    }
    const std::size_t rec_line = line;
    auto fields = parse_record(text, pos, line, table.source);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error("[csv] " + table.source + ":" + std::to_string(rec_line) + ": expected " +
                  std::to_string(table.header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(rec_line);
  }
  if (!have_header) throw Error("[csv] " + table.source + ": no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return read_csv_text(read_text_file(path), path.string());
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") != std::string::npos) {
      out.push_back('"');
      for (char c : f) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
      }
      out.push_back('"');
    } else {
      out += f;
    }
  }
  out.push_back('\n');
  return out;
}

double parse_double(std::string_view field, const std::string& source, std::size_t line,
                    std::string_view what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw Error("[csv] " + source + ":" + std::to_string(line) + ": bad numeric value '" +
                std::string(field) + "' for " + std::string(what));
  return v;
}

long parse_long(std::string_view field, const std::string& source, std::size_t line,
                std::string_view what) {
  long v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw Error("[csv] " + source + ":" + std::to_string(line) + ": bad integer value '" +
                std::string(field) + "' for " + std::string(what));
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("[io] cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("[io] write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("[io] cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace gvcpanel::io
