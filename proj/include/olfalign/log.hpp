#pragma once

#include <string_view>

namespace olfalign::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Messages below the threshold are dropped. Default: warn.
void set_level(Level level);
Level level();

void debug(std::string_view message);
void info(std::string_view message);
void warn(std::string_view message);
void error(std::string_view message);

}  // namespace olfalign::log
