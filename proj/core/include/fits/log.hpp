#pragma once

#include <string_view>

namespace fits::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Threshold from the FITS_LOG environment variable (debug, info, warn,
/// error, off); defaults to warn. Read once per process.
Level threshold();
void set_threshold(Level level);

void write(Level level, std::string_view message);
inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace fits::log
