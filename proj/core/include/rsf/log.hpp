#pragma once

#include <string>

namespace rsf::log {

enum class Level { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

void set_level(Level level);
Level level();

// All progress output goes to stderr; machine-readable results only ever go to files.
void warn(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace rsf::log
