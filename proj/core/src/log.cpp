#include "gvcpanel/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gvcpanel {

static LogLevel parse_level() {
  const char* v = std::getenv("GVC_PANEL_LOG");
  if (!v) return LogLevel::quiet;
  if (std::strcmp(v, "debug") == 0) return LogLevel::debug;
  if (std::strcmp(v, "info") == 0) return LogLevel::info;
  return LogLevel::quiet;
}

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace gvcpanel
