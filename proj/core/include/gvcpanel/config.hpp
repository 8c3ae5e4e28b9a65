#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gvcpanel::io {

// `key = value` lines with optional `[label]` sections. '#' comments and
// blank lines are skipped. Keys before the first section are globals; plan
// runners merge them under each section (section entries win).
struct ConfigSection {
  std::string label;
  std::size_t line = 0;  // of the [label] header
  std::map<std::string, std::string> entries;
};

struct ConfigFile {
  std::string source;
  std::map<std::string, std::string> globals;
  std::vector<ConfigSection> sections;  // file order

  // globals overlaid with the section's own entries
  std::map<std::string, std::string> merged(std::size_t index) const;
};

ConfigFile parse_config_text(std::string_view text, std::string source_label);
ConfigFile read_config(const std::filesystem::path& path);

}  // namespace gvcpanel::io
