#pragma once

#include <string_view>

// Minimal stderr logger. Verbosity comes from TOPICTAX_LOG
// (error | warn | info | debug), default warn.
namespace topictax::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

Level level();
void write(Level lvl, std::string_view msg);

inline void error(std::string_view msg) { write(Level::kError, msg); }
inline void warn(std::string_view msg) { write(Level::kWarn, msg); }
inline void info(std::string_view msg) { write(Level::kInfo, msg); }
inline void debug(std::string_view msg) { write(Level::kDebug, msg); }

}  // namespace topictax::log
