#pragma once

#include <stdexcept>
#include <string>

namespace gvcpanel {

// Single exception type for pipeline failures; messages carry a stage tag
// like "[ingest] ..." so CLI error output stays greppable.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gvcpanel
