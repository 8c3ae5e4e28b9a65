#pragma once

#include <string>

namespace gvcpanel {

// Verbosity is read once from GVC_PANEL_LOG (quiet|info|debug, default quiet).
enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level();

// All logging goes to stderr so stdout stays clean for piped table output.
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace gvcpanel
