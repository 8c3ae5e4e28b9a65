#include "gvcpanel/config.hpp"

#include <fstream>
#include <sstream>

#include "gvcpanel/error.hpp"

namespace gvcpanel::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::map<std::string, std::string> ConfigFile::merged(std::size_t index) const {
  std::map<std::string, std::string> out = globals;
  for (const auto& [k, v] : sections.at(index).entries) out[k] = v;
  return out;
}

ConfigFile parse_config_text(std::string_view text, std::string source_label) {
  ConfigFile out;
  out.source = std::move(source_label);
  std::map<std::string, std::string>* scope = &out.globals;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start
                                                                            : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = out.source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error("[config] " + where + ": section header missing ']'");
      const std::string label{trim(line.substr(1, line.size() - 2))};
      if (label.empty()) throw Error("[config] " + where + ": empty section label");
      for (const auto& s : out.sections)
        if (s.label == label)
          throw Error("[config] " + where + ": duplicate section '" + label + "'");
      out.sections.push_back({label, line_no, {}});
      scope = &out.sections.back().entries;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error("[config] " + where + ": expected 'key = value'");
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (key.empty()) throw Error("[config] " + where + ": empty key");
    if (scope->count(key))
      throw Error("[config] " + where + ": duplicate key '" + key + "'");
    (*scope)[key] = value;
  }
  return out;
}

ConfigFile read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw Error("[config] cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace gvcpanel::io
